"""Torch models for the two decoder flavors.

The binarized model trains in the +/-1 domain (agreement count P and the
hardware dot product relate by D = 2P - F), with straight-through sign
estimators for weights and hard activations and a per-channel real shift
beta.  Zero padding of the {0,1} hardware maps to -1 padding here.  At export
the shift folds into the integer threshold T = ceil(F/2 - beta), and
`binary_forward_bits` recomputes inference with pure integer arithmetic, so
exported predictions are reproducible bit-for-bit.
"""

from __future__ import annotations

import math

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from .formats import LayerParams


class _SignSTE(torch.autograd.Function):
    @staticmethod
    def forward(ctx, w):
        ctx.save_for_backward(w)
        return torch.where(w >= 0, torch.ones_like(w), -torch.ones_like(w))

    @staticmethod
    def backward(ctx, grad):
        (w,) = ctx.saved_tensors
        return grad * (w.abs() <= 1.0)


def sign_ste(w: torch.Tensor) -> torch.Tensor:
    return _SignSTE.apply(w)


def hard_bits(a: torch.Tensor, gamma: float) -> torch.Tensor:
    """Exact (a >= 0) bits forward, sigmoid surrogate gradient backward."""
    soft = torch.sigmoid(a / gamma)
    hard = (a >= 0).to(a.dtype)
    return soft + (hard - soft).detach()


class Fp32Decoder(nn.Module):
    """Plain conv stack over {0,1} windows: rectifier hidden layers, raw
    logits out (the engine's sigmoid > 0.5 rule equals logits > 0)."""

    def __init__(self, channels: list[int], kernels: list[int]):
        super().__init__()
        self.convs = nn.ModuleList(
            nn.Conv2d(cin, cout, k, padding=k // 2)
            for (cin, cout), k in zip(zip(channels, channels[1:]), kernels)
        )

    def forward(self, x):
        for i, conv in enumerate(self.convs):
            x = conv(x)
            if i < len(self.convs) - 1:
                x = F.relu(x)
        return x

    def export_layers(self) -> list[LayerParams]:
        out = []
        for conv in self.convs:
            w = conv.weight.detach().cpu().numpy().astype(np.float32)
            b = conv.bias.detach().cpu().numpy().astype(np.float32)
            out.append(LayerParams(w.shape[1], w.shape[0], w.shape[2], w.shape[3], w, b))
        return out


class BinaryDecoder(nn.Module):
    def __init__(self, channels: list[int], kernels: list[int]):
        super().__init__()
        self.channels = channels
        self.kernels = kernels
        self.weights = nn.ParameterList()
        self.betas = nn.ParameterList()
        for (cin, cout), k in zip(zip(channels, channels[1:]), kernels):
            w = torch.empty(cout, cin, k, k)
            nn.init.uniform_(w, -0.2, 0.2)
            self.weights.append(nn.Parameter(w))
            self.betas.append(nn.Parameter(torch.zeros(cout)))

    @property
    def fanins(self) -> list[int]:
        return [int(np.prod(w.shape[1:])) for w in self.weights]

    def init_from_fp32(self, fp32_layers: list[LayerParams]) -> None:
        with torch.no_grad():
            for w, lp in zip(self.weights, fp32_layers):
                src = torch.from_numpy(lp.weights.astype(np.float32))
                scale = src.abs().amax(dim=(1, 2, 3), keepdim=True).clamp_min(1e-6)
                w.copy_((src / scale).clamp(-1, 1))

    def forward(self, x01):
        """Training forward: exact bits, surrogate gradients; returns logits
        of the last layer (decision boundary at 0)."""
        a = None
        x = 2.0 * x01 - 1.0
        last = len(self.weights) - 1
        for i, (w, beta) in enumerate(zip(self.weights, self.betas)):
            k = w.shape[2]
            xp = F.pad(x, (k // 2,) * 4, value=-1.0)
            wb = sign_ste(w)
            a = F.conv2d(xp, wb) + 2.0 * beta[None, :, None, None]
            gamma = math.sqrt(self.fanins[i])
            if i < last:
                bits = hard_bits(a, gamma)
                x = 2.0 * bits - 1.0
            else:
                a = a / gamma
        return a

    def export_layers(self) -> list[LayerParams]:
        out = []
        for w, beta in zip(self.weights, self.betas):
            bits = (w.detach() >= 0).cpu().numpy().astype(np.uint8)
            fanin = int(np.prod(bits.shape[1:]))
            th = np.ceil(fanin / 2.0 - beta.detach().cpu().numpy()).astype(np.int64)
            th = np.clip(th, 0, fanin).astype(np.int32)
            out.append(
                LayerParams(bits.shape[1], bits.shape[0], bits.shape[2], bits.shape[3], bits, th)
            )
        return out


def binary_forward_bits(layers: list[LayerParams], window: np.ndarray) -> np.ndarray:
    """Integer-exact inference over exported parameters: agreement count
    against the per-channel thresholds, zero padding contributing input 0."""
    x = window.astype(np.int64)
    for lp in layers:
        cout, cin, kh, kw = lp.weights.shape
        fanin = cin * kh * kw
        H, W = x.shape[1:]
        xp = np.zeros((cin, H + kh - 1, W + kw - 1), dtype=np.int64)
        xp[:, kh // 2:kh // 2 + H, kw // 2:kw // 2 + W] = x
        cols = np.empty((H * W, fanin), dtype=np.int64)
        idx = 0
        for ic in range(cin):
            for dr in range(kh):
                for dc in range(kw):
                    cols[:, idx] = xp[ic, dr:dr + H, dc:dc + W].reshape(-1)
                    idx += 1
        wf = lp.weights.reshape(cout, fanin).astype(np.int64)
        pop = fanin - wf.sum(axis=1)[None, :] - cols.sum(axis=1)[:, None] + 2 * (cols @ wf.T)
        x = (pop >= lp.bias_or_threshold.astype(np.int64)[None, :]).T.reshape(cout, H, W)
        x = x.astype(np.int64)
    return x.astype(np.uint8)
