"""Monte-Carlo trial runners and result rows for the command-line front end.

Each trial is keyed by (seed, trial_index), so rows are reproducible and
trials could run in any order; results are reduced in trial order.  A trial
that exceeds the exact-matching capacity counts as a logical failure (the
reference decoder gave up), which keeps rates conservative and monotone.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .lattice import (
    NoiseParams,
    PatchShape,
    build_layout,
    build_ls_schedule,
    sample_errors,
)
from .mwpm import CapacityExceeded, mwpm_decode
from .nn import ConvNet
from .online import OnlineConfig, run_pipeline

Z95 = 1.959963984540054


def wilson_interval(failures: int, trials: int) -> tuple[float, float]:
    """95% Wilson score interval for a binomial rate."""
    if trials == 0:
        return 0.0, 1.0
    phat = failures / trials
    z2 = Z95 * Z95
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = (Z95 / denom) * ((phat * (1 - phat) / trials + z2 / (4 * trials * trials)) ** 0.5)
    lo = 0.0 if failures == 0 else max(0.0, center - half)
    hi = 1.0 if failures == trials else min(1.0, center + half)
    return lo, hi


@dataclass
class ResultRow:
    d: int
    p: float
    trials: int
    failures: int
    logical_error_rate: float
    ci_low: float
    ci_high: float
    wall_seconds: float

    CSV_HEADER = "d,p,trials,failures,logical_error_rate,ci_low,ci_high,wall_seconds"

    def to_csv(self, timing: bool = False) -> str:
        wall = f"{self.wall_seconds:.3f}" if timing else ""
        return (
            f"{self.d},{self.p:.10g},{self.trials},{self.failures},"
            f"{self.logical_error_rate:.10g},{self.ci_low:.10g},{self.ci_high:.10g},{wall}"
        )


def _row(d: int, p: float, trials: int, failures: int, wall: float) -> ResultRow:
    lo, hi = wilson_interval(failures, trials)
    rate = failures / trials if trials else 0.0
    return ResultRow(d, p, trials, failures, rate, lo, hi, wall)


def run_memory_trials(
    d: int,
    p: float,
    trials: int,
    seed: int,
    T: int | None = None,
    decoder: str = "greedy",
    net: ConvNet | None = None,
    cfg: OnlineConfig | None = None,
) -> ResultRow:
    """Idling-protection trials on a single patch; failure = any logical flip."""
    layout = build_layout(d)
    T = T if T is not None else d
    cfg = cfg or OnlineConfig()
    start = time.perf_counter()
    failures = 0
    for trial in range(trials):
        tab = sample_errors(layout, NoiseParams(p=p, seed=seed, trial_index=trial), T)
        if decoder == "mwpm":
            try:
                res = mwpm_decode(layout, tab)
                failed = res["x_fail"] or res["z_fail"]
            except CapacityExceeded:
                failed = True
        elif decoder == "greedy":
            failed = run_pipeline(layout, tab, net, cfg).failed
        else:
            raise ValueError(f"unknown decoder {decoder!r}")
        failures += int(failed)
    return _row(d, p, trials, failures, time.perf_counter() - start)


def run_ls_trials(
    d: int,
    p: float,
    trials: int,
    seed: int,
    net: ConvNet | None = None,
    cfg: OnlineConfig | None = None,
) -> ResultRow:
    """Merge-and-split trials; failure = wrong logical XX readout or a
    logical error on either patch."""
    layout = build_layout(d, PatchShape.MERGED_ROUGH)
    sched = build_ls_schedule(d)
    cfg = cfg or OnlineConfig()
    start = time.perf_counter()
    failures = 0
    for trial in range(trials):
        tab = sample_errors(
            layout, NoiseParams(p=p, seed=seed, trial_index=trial), sched.total_cycles, sched
        )
        res = run_pipeline(layout, tab, net, cfg, sched)
        failures += int(res.failed)
    return _row(d, p, trials, failures, time.perf_counter() - start)
