"""Training loops and evaluation for the first-stage decoders."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import torch
from torch import nn

from .formats import Dataset, LayerParams
from .models import BinaryDecoder, Fp32Decoder, binary_forward_bits


@dataclass
class TrainConfig:
    """Reference-scale defaults; `desk()` shrinks them to laptop size.

    Learning-rate schedules decay exponentially per epoch; the decay factor
    is exposed because the reference values were hand-tuned.
    """

    epochs: int = 100
    lr_fp32: float = 0.01
    lr_binary: float = 0.001
    lr_decay: float = 0.97
    batch_size: int = 512
    hidden: tuple[int, ...] = (16, 16)
    kernels: tuple[int, ...] = (7, 5, 5)
    pos_weight: float = 4.0
    val_fraction: float = 0.1
    seed: int = 1
    deterministic: bool = True

    @classmethod
    def desk(cls) -> "TrainConfig":
        return cls(epochs=12, hidden=(9,), kernels=(5, 5))

    def channels(self, K: int) -> list[int]:
        return [2 * K + 2, *self.hidden, 4]


def _setup(cfg: TrainConfig) -> torch.Generator:
    if cfg.deterministic:
        torch.set_num_threads(1)
    torch.manual_seed(cfg.seed)
    gen = torch.Generator()
    gen.manual_seed(cfg.seed)
    return gen


def _tensors(ds: Dataset) -> tuple[torch.Tensor, torch.Tensor]:
    return (
        torch.from_numpy(ds.windows).float(),
        torch.from_numpy(ds.labels).float(),
    )


def _split(x, y, frac, gen):
    n = len(x)
    n_val = int(n * frac)
    perm = torch.randperm(n, generator=gen)
    val, tr = perm[:n_val], perm[n_val:]
    return x[tr], y[tr], x[val], y[val]


def _run_epochs(model, x, y, xv, yv, cfg: TrainConfig, lr: float, gen, log=None):
    loss_fn = nn.BCEWithLogitsLoss(pos_weight=torch.tensor(cfg.pos_weight))
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    sched = torch.optim.lr_scheduler.ExponentialLR(opt, gamma=cfg.lr_decay)
    history = []
    for epoch in range(cfg.epochs):
        model.train()
        perm = torch.randperm(len(x), generator=gen)
        total = 0.0
        for i in range(0, len(x), cfg.batch_size):
            idx = perm[i:i + cfg.batch_size]
            opt.zero_grad()
            loss = loss_fn(model(x[idx]), y[idx])
            loss.backward()
            opt.step()
            total += float(loss) * len(idx)
        sched.step()
        train_loss = total / len(x)
        val_loss = float("nan")
        if len(xv):
            model.eval()
            with torch.no_grad():
                losses = [
                    float(loss_fn(model(xv[i:i + cfg.batch_size]), yv[i:i + cfg.batch_size]))
                    * len(xv[i:i + cfg.batch_size])
                    for i in range(0, len(xv), cfg.batch_size)
                ]
            val_loss = sum(losses) / len(xv)
        history.append((train_loss, val_loss))
        if log:
            log(f"epoch {epoch + 1}/{cfg.epochs}: train bce {train_loss:.4f}"
                + (f", val bce {val_loss:.4f}" if len(xv) else ""))
    return history


def train_fp32(ds: Dataset, cfg: TrainConfig, log=None):
    """Returns (model, history); export with model.export_layers()."""
    gen = _setup(cfg)
    x, y = _tensors(ds)
    x, y, xv, yv = _split(x, y, cfg.val_fraction, gen)
    model = Fp32Decoder(cfg.channels(ds.K), list(cfg.kernels))
    history = []
    if cfg.epochs > 0:
        history = _run_epochs(model, x, y, xv, yv, cfg, cfg.lr_fp32, gen, log)
    return model, history


def train_binary(ds: Dataset, cfg: TrainConfig, init_fp32: list[LayerParams] | None = None, log=None):
    """Straight-through-estimator training of the {0,1}/majority net,
    optionally warm-started from trained fp32 weights."""
    gen = _setup(cfg)
    x, y = _tensors(ds)
    x, y, xv, yv = _split(x, y, cfg.val_fraction, gen)
    model = BinaryDecoder(cfg.channels(ds.K), list(cfg.kernels))
    if init_fp32 is not None:
        model.init_from_fp32(init_fp32)
    history = []
    if cfg.epochs > 0:
        history = _run_epochs(model, x, y, xv, yv, cfg, cfg.lr_binary, gen, log)
    return model, history


def eval_accuracy(pred: np.ndarray, labels: np.ndarray) -> dict:
    """Per-channel precision/recall of bit predictions against labels."""
    names = ("x_data", "z_data", "mf_ancx", "mf_ancz")
    out = {}
    for ch, name in enumerate(names):
        p = pred[:, ch].astype(bool)
        t = labels[:, ch].astype(bool)
        tp = int((p & t).sum())
        fp = int((p & ~t).sum())
        fn = int((~p & t).sum())
        out[name] = {
            "precision": tp / (tp + fp) if tp + fp else 1.0,
            "recall": tp / (tp + fn) if tp + fn else 1.0,
            "positives": int(t.sum()),
            "predicted": int(p.sum()),
        }
    return out


def predict_binary(layers: list[LayerParams], windows: np.ndarray) -> np.ndarray:
    return np.stack([binary_forward_bits(layers, w) for w in windows])


def predict_fp32(model: Fp32Decoder, windows: np.ndarray, batch: int = 512) -> np.ndarray:
    model.eval()
    outs = []
    with torch.no_grad():
        for i in range(0, len(windows), batch):
            x = torch.from_numpy(windows[i:i + batch]).float()
            outs.append((model(x) > 0).numpy().astype(np.uint8))
    return np.concatenate(outs) if outs else np.zeros((0, 4) + windows.shape[2:], np.uint8)
