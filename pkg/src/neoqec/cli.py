"""Command-line front end: dataset generation, decoder sweeps, merge-and-split
experiments, NPU verification, and power reports.

Every command is a pure function of (config, seed): re-running with the same
inputs produces byte-identical output files.  Timing is therefore left out of
the CSV unless --timing is passed.  Config files are flat key=value text
(# comments allowed); command-line flags override file values, and the
NEOQEC_SEED environment variable overrides the seed everywhere.

Exit codes: 0 success, 2 configuration error, 3 verification failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .datasets import write_dataset
from .kernels import BACKEND
from .lattice import PatchShape, trial_rng
from .nn import base_model_specs
from .npu import decoder_power_report, npu_cost, npu_simulate, throughput_check, count_mults
from .online import OnlineConfig
from .sweeps import ResultRow, run_ls_trials, run_memory_trials
from .weights_io import NeowError, load_weights

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_IO = 4


class ConfigError(ValueError):
    pass


def load_config_file(path: str) -> dict[str, str]:
    cfg = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for ln, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{ln}: expected key=value, got {raw.rstrip()!r}")
                key, val = line.split("=", 1)
                cfg[key.strip()] = val.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return cfg


def _merged(args: argparse.Namespace, file_cfg: dict[str, str], key: str, cast, default):
    """Command line beats config file beats built-in default."""
    cli_val = getattr(args, key.replace("-", "_"), None)
    if cli_val is not None:
        return cli_val
    if key in file_cfg:
        try:
            return cast(file_cfg[key])
        except ValueError as exc:
            raise ConfigError(f"config key {key}: {exc}") from exc
    return default


def _seed(args, file_cfg) -> int:
    env = os.environ.get("NEOQEC_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"NEOQEC_SEED: {exc}") from exc
    return _merged(args, file_cfg, "seed", int, 1)


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _load_net(path: str | None):
    if path is None:
        return None
    return load_weights(path)


def _online_cfg(args, file_cfg) -> OnlineConfig:
    return OnlineConfig(
        th_v=_merged(args, file_cfg, "th_v", int, 2),
        r_max=_merged(args, file_cfg, "r_max", int, None),
        time_weight=_merged(args, file_cfg, "time_weight", int, 1),
    )


# ------------------------------------------------------------------ commands


def cmd_gen_data(args, file_cfg) -> int:
    d = _merged(args, file_cfg, "d", int, 9)
    K = _merged(args, file_cfg, "K", int, 4)
    shape = PatchShape(_merged(args, file_cfg, "shape", str, "single"))
    records = _merged(args, file_cfg, "records", int, 1000)
    p = _merged(args, file_cfg, "p", float, 0.04)
    seed = _seed(args, file_cfg)
    out = _merged(args, file_cfg, "out", str, None)
    if out is None:
        raise ConfigError("gen-data needs an output path (--out)")
    if records < 0:
        raise ConfigError("records must be >= 0")
    info = write_dataset(out, d, K, shape, records, p, seed)
    sys.stderr.write(
        f"wrote {info.record_count} records (d={info.d}, K={info.K}, "
        f"{info.shape.value}, p={info.p_train:g}) to {out}\n"
    )
    return EXIT_OK


def _rows_csv(rows: list[ResultRow], timing: bool) -> str:
    return "\n".join([ResultRow.CSV_HEADER] + [r.to_csv(timing) for r in rows]) + "\n"


def cmd_decode(args, file_cfg) -> int:
    d = _merged(args, file_cfg, "d", int, 3)
    p = _merged(args, file_cfg, "p", float, 0.01)
    T = _merged(args, file_cfg, "T", int, None)
    trials = _merged(args, file_cfg, "trials", int, 1000)
    decoder = _merged(args, file_cfg, "decoder", str, "greedy")
    seed = _seed(args, file_cfg)
    net = _load_net(_merged(args, file_cfg, "weights", str, None))
    row = run_memory_trials(
        d, p, trials, seed, T=T, decoder=decoder, net=net, cfg=_online_cfg(args, file_cfg)
    )
    _emit(_rows_csv([row], args.timing), _merged(args, file_cfg, "out", str, None))
    return EXIT_OK


def cmd_sweep(args, file_cfg) -> int:
    ds = _merged(args, file_cfg, "d", _int_list, [3, 5])
    ps = _merged(args, file_cfg, "p", _float_list, [0.005, 0.01, 0.02])
    trials = _merged(args, file_cfg, "trials", int, 2000)
    decoder = _merged(args, file_cfg, "decoder", str, "greedy")
    base_seed = _seed(args, file_cfg)
    net = _load_net(_merged(args, file_cfg, "weights", str, None))
    cfg = _online_cfg(args, file_cfg)
    rows = []
    for i, d in enumerate(ds):
        for j, p in enumerate(ps):
            row_seed = base_seed + 1000 * i + j
            rows.append(
                run_memory_trials(d, p, trials, row_seed, decoder=decoder, net=net, cfg=cfg)
            )
    _emit(_rows_csv(rows, args.timing), _merged(args, file_cfg, "out", str, None))
    return EXIT_OK


def cmd_ls_decode(args, file_cfg) -> int:
    ds = _merged(args, file_cfg, "d", _int_list, [3])
    ps = _merged(args, file_cfg, "p", _float_list, [0.005, 0.01])
    trials = _merged(args, file_cfg, "trials", int, 1000)
    base_seed = _seed(args, file_cfg)
    net = _load_net(_merged(args, file_cfg, "weights", str, None))
    cfg = _online_cfg(args, file_cfg)
    rows = []
    for i, d in enumerate(ds):
        for j, p in enumerate(ps):
            rows.append(run_ls_trials(d, p, trials, base_seed + 1000 * i + j, net=net, cfg=cfg))
    _emit(_rows_csv(rows, args.timing), _merged(args, file_cfg, "out", str, None))
    return EXIT_OK


def cmd_npu_verify(args, file_cfg) -> int:
    cases = _merged(args, file_cfg, "cases", int, 10_000)
    max_n = _merged(args, file_cfg, "max_n", int, 512)
    seed = _seed(args, file_cfg)
    rng = trial_rng(seed, 0)
    mismatches = 0
    for _ in range(cases):
        N = int(rng.integers(1, max_n + 1))
        w = (rng.random(N) < 0.5).astype(np.uint8)
        x = (rng.random(N) < 0.5).astype(np.uint8)
        T = int(rng.integers(0, N + 1))
        k = 1
        while (1 << k) <= N:
            k += 1
        act, _ = npu_simulate(w, x, T, k)
        expect = 1 if int(np.sum(w == x)) >= T else 0
        if args.inject_fault:
            expect ^= 1
        mismatches += int(act != expect)
    rep = npu_cost(9)
    lines = [
        f"cases = {cases}",
        f"mismatches = {mismatches}",
        f"k9_jj_total = {rep.jj_total}",
        f"k9_bias_ma = {rep.bias_total_ma}",
        f"k9_latency_ps = {rep.latency_ps}",
        f"k9_fmax_ghz = {rep.fmax_ghz:.1f}",
        f"result = {'PASS' if mismatches == 0 else 'FAIL'}",
    ]
    _emit("\n".join(lines) + "\n", _merged(args, file_cfg, "out", str, None))
    return EXIT_OK if mismatches == 0 else EXIT_VERIFY


def cmd_power(args, file_cfg) -> int:
    d = _merged(args, file_cfg, "d", int, 9)
    f_ghz = _merged(args, file_cfg, "f_ghz", float, 16.0)
    stage2 = _merged(args, file_cfg, "stage2_uw", float, 400.3)
    budget = _merged(args, file_cfg, "budget_w", float, 1.0)
    rep = decoder_power_report(d, f_ghz, stage2, budget)
    text = rep.to_csv() if args.csv else rep.to_text()
    if not args.csv:
        check = throughput_check(_base_net(), d, f_ghz)
        text += (
            f"mults_per_npu = {check['mults_required']}\n"
            f"npu_count = {check['npu_count']}\n"
            f"throughput_feasible = {check['feasible']}\n"
        )
    _emit(text, _merged(args, file_cfg, "out", str, None))
    return EXIT_OK


def _base_net():
    from .nn import ConvNet

    specs = base_model_specs(K=4)
    weights = [np.zeros((s.out_ch, s.in_ch, s.kh, s.kw), np.uint8) for s in specs]
    ths = [np.zeros(s.out_ch, np.int32) for s in specs]
    return ConvNet(specs, weights, thresholds=ths, K=4)


def cmd_mults(args, file_cfg) -> int:
    d = _merged(args, file_cfg, "d", int, 9)
    res = count_mults(_base_net(), d)
    lines = [f"layer{i} = {v}" for i, v in enumerate(res["per_layer"])]
    lines.append(f"total = {res['total']}")
    lines.append(f"total_coefficient = {res['total_coefficient']}")
    _emit("\n".join(lines) + "\n", _merged(args, file_cfg, "out", str, None))
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="neoqec",
        description="surface-code decoding lab (backend: %s)" % BACKEND,
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--timing", action="store_true",
                       help="fill the wall_seconds CSV column (breaks byte-reproducibility)")

    p = sub.add_parser("gen-data", help="write a NEOD training dataset")
    common(p)
    p.add_argument("--d", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--shape", choices=[s.value for s in PatchShape])
    p.add_argument("--records", type=int)
    p.add_argument("--p", type=float)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("decode", help="one decoding run at a single (d, p)")
    common(p)
    p.add_argument("--d", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--T", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--decoder", choices=["greedy", "mwpm"])
    p.add_argument("--weights")
    p.add_argument("--th-v", dest="th_v", type=int)
    p.add_argument("--r-max", dest="r_max", type=int)
    p.add_argument("--time-weight", dest="time_weight", type=int)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("sweep", help="logical error rate over (d, p) grids")
    common(p)
    p.add_argument("--d", type=_int_list, help="comma list, e.g. 3,5")
    p.add_argument("--p", type=_float_list, help="comma list, e.g. 0.005,0.01,0.02")
    p.add_argument("--trials", type=int)
    p.add_argument("--decoder", choices=["greedy", "mwpm"])
    p.add_argument("--weights")
    p.add_argument("--th-v", dest="th_v", type=int)
    p.add_argument("--r-max", dest="r_max", type=int)
    p.add_argument("--time-weight", dest="time_weight", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ls-decode", help="merge-and-split trials")
    common(p)
    p.add_argument("--d", type=_int_list)
    p.add_argument("--p", type=_float_list)
    p.add_argument("--trials", type=int)
    p.add_argument("--weights")
    p.add_argument("--th-v", dest="th_v", type=int)
    p.add_argument("--r-max", dest="r_max", type=int)
    p.add_argument("--time-weight", dest="time_weight", type=int)
    p.set_defaults(func=cmd_ls_decode)

    p = sub.add_parser("npu-verify", help="fuzz the counter model against popcount")
    common(p)
    p.add_argument("--cases", type=int)
    p.add_argument("--max-n", dest="max_n", type=int)
    p.add_argument("--inject-fault", action="store_true",
                   help="negative control: corrupt the oracle to prove detection")
    p.set_defaults(func=cmd_npu_verify)

    p = sub.add_parser("power", help="decoder power report")
    common(p)
    p.add_argument("--d", type=int)
    p.add_argument("--f-ghz", dest="f_ghz", type=float)
    p.add_argument("--stage2-uw", dest="stage2_uw", type=float)
    p.add_argument("--budget-w", dest="budget_w", type=float)
    p.add_argument("--csv", action="store_true", help="emit the CSV block instead of text")
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("mults", help="multiplication counts of the base model")
    common(p)
    p.add_argument("--d", type=int)
    p.set_defaults(func=cmd_mults)

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        file_cfg = load_config_file(args.config) if args.config else {}
        return args.func(args, file_cfg)
    except (ConfigError, NeowError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
