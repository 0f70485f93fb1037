"""Command line for training and evaluating first-stage decoder nets.

    neoqec-train fp32   --data train.neod --out fp32.neow [options]
    neoqec-train binary --data train.neod --init fp32.neow --out bin.neow
    neoqec-train eval   --weights bin.neow --data val.neod
"""

from __future__ import annotations

import argparse
import json
import sys

from .formats import read_neod, read_neow, write_neow
from .models import Fp32Decoder
from .train import (
    TrainConfig,
    eval_accuracy,
    predict_binary,
    predict_fp32,
    train_binary,
    train_fp32,
)

import torch


def _cfg_from_args(args) -> TrainConfig:
    cfg = TrainConfig.desk() if args.desk else TrainConfig()
    overrides = {}
    for name in ("epochs", "batch_size", "pos_weight", "seed", "lr_decay", "val_fraction"):
        val = getattr(args, name)
        if val is not None:
            overrides[name] = val
    if args.hidden is not None:
        overrides["hidden"] = tuple(int(x) for x in args.hidden.split(",") if x.strip())
    if args.kernels is not None:
        overrides["kernels"] = tuple(int(x) for x in args.kernels.split(",") if x.strip())
    if args.lr is not None:
        overrides["lr_fp32"] = args.lr
        overrides["lr_binary"] = args.lr
    from dataclasses import replace

    return replace(cfg, **overrides)


def _log(msg: str) -> None:
    sys.stderr.write(msg + "\n")
    sys.stderr.flush()


def cmd_fp32(args) -> int:
    ds = read_neod(args.data)
    cfg = _cfg_from_args(args)
    model, history = train_fp32(ds, cfg, log=_log)
    write_neow(args.out, "fp32", ds.K, model.export_layers())
    _log(f"wrote {args.out}")
    return 0


def cmd_binary(args) -> int:
    ds = read_neod(args.data)
    cfg = _cfg_from_args(args)
    init = None
    if args.init:
        kind, K, layers = read_neow(args.init)
        if kind != "fp32":
            _log("error: --init must point at an fp32 NEOW file")
            return 2
        if K != ds.K:
            _log("error: --init window depth does not match the dataset")
            return 2
        init = layers
        cfg_shapes = [(lp.in_ch, lp.out_ch, lp.kh) for lp in layers]
        hidden = tuple(lp.out_ch for lp in layers[:-1])
        kernels = tuple(lp.kh for lp in layers)
        from dataclasses import replace

        cfg = replace(cfg, hidden=hidden, kernels=kernels)
        del cfg_shapes
    model, history = train_binary(ds, cfg, init_fp32=init, log=_log)
    write_neow(args.out, "binary", ds.K, model.export_layers())
    _log(f"wrote {args.out}")
    return 0


def cmd_eval(args) -> int:
    ds = read_neod(args.data)
    kind, K, layers = read_neow(args.weights)
    if K != ds.K:
        _log("error: weight window depth does not match the dataset")
        return 2
    n = min(len(ds.windows), args.records) if args.records else len(ds.windows)
    windows, labels = ds.windows[:n], ds.labels[:n]
    if kind == "binary":
        pred = predict_binary(layers, windows)
    else:
        model = Fp32Decoder([layers[0].in_ch, *(lp.out_ch for lp in layers[:-1]), 4],
                            [lp.kh for lp in layers])
        with torch.no_grad():
            for conv, lp in zip(model.convs, layers):
                conv.weight.copy_(torch.from_numpy(lp.weights))
                conv.bias.copy_(torch.from_numpy(lp.bias_or_threshold))
        pred = predict_fp32(model, windows)
    print(json.dumps(eval_accuracy(pred, labels), indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="neoqec-train")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, training=True):
        p.add_argument("--data", required=True, help="NEOD dataset")
        if training:
            p.add_argument("--out", required=True, help="NEOW output path")
            p.add_argument("--desk", action="store_true",
                           help="desk-scale defaults (small net, few epochs)")
            p.add_argument("--epochs", type=int)
            p.add_argument("--batch-size", dest="batch_size", type=int)
            p.add_argument("--hidden", help="comma list of hidden channels")
            p.add_argument("--kernels", help="comma list of kernel sides")
            p.add_argument("--lr", type=float)
            p.add_argument("--lr-decay", dest="lr_decay", type=float)
            p.add_argument("--pos-weight", dest="pos_weight", type=float)
            p.add_argument("--val-fraction", dest="val_fraction", type=float)
            p.add_argument("--seed", type=int)

    p = sub.add_parser("fp32", help="train the float decoder")
    common(p)
    p.set_defaults(func=cmd_fp32)

    p = sub.add_parser("binary", help="train the binarized decoder")
    common(p)
    p.add_argument("--init", help="fp32 NEOW file to warm-start from")
    p.set_defaults(func=cmd_binary)

    p = sub.add_parser("eval", help="per-channel precision/recall on a dataset")
    common(p, training=False)
    p.add_argument("--weights", required=True)
    p.add_argument("--records", type=int, help="cap the evaluated record count")
    p.set_defaults(func=cmd_eval)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
