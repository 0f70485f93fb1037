"""Online second-stage decoding: buffered defects, greedy space-time matching,
and the full per-cycle pipeline with optional first-stage inference.

Detection layers arrive one at a time.  Once th_v layers are buffered, each
new layer triggers a greedy sweep: radii grow from 1 to r_max, unmatched
defects are scanned oldest-first, and each one takes the nearest compatible
unmatched partner within the radius, else its boundary when that is within
reach.  Every match writes a correction chain into the Pauli frame and
cancels exactly its own detection events, so unmatched defects simply carry
forward.  The end-of-run flush repeats the sweep with an unbounded radius,
which terminates because every defect has a finite-cost boundary resolution.

With a first-stage net, inference for target layer t runs as soon as layer
t+K-1 is available (a K-1 cycle lag); inferred errors update the frame and
their implied events are cancelled before the layer is handed to the buffer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .corrections import (
    apply_chain,
    boundary_plan,
    chain_tableau,
    pair_chain,
    pair_feasible,
)
from .lattice import (
    CodeLayout,
    ErrorTableau,
    KIND_ANCX,
    LsSchedule,
    PatchShape,
    extract_detection,
    judge_logical,
    ls_logical_xx,
)
from .nn import ConvNet, DetectionVolume, build_window, conv_forward_binary, conv_forward_fp32, threshold_outputs


@dataclass(frozen=True)
class OnlineConfig:
    th_v: int = 2
    r_max: int | None = None  # defaults to 2d at run time
    time_weight: int = 1

    def __post_init__(self):
        if self.th_v < 1:
            raise ValueError("th_v must be >= 1")
        if self.r_max is not None and self.r_max < 1:
            raise ValueError("r_max must be >= 1")


class DefectBuffer:
    """Live defects of the ingested layers, oldest first."""

    def __init__(self):
        self.live: set[tuple[int, int, int]] = set()
        self.next_t = 0

    @property
    def span(self) -> int:
        return self.next_t

    def ingest_layer(self, layer_events: np.ndarray, t: int) -> None:
        if t != self.next_t:
            raise ValueError(f"layers must arrive in order: got {t}, expected {self.next_t}")
        for r, c in np.argwhere(layer_events):
            self.live.add((t, int(r), int(c)))
        self.next_t = t + 1

    def toggle(self, defect: tuple[int, int, int]) -> None:
        if defect in self.live:
            self.live.remove(defect)
        else:
            self.live.add(defect)

    def sorted_defects(self) -> list[tuple[int, int, int]]:
        return sorted(self.live)


@dataclass
class PipelineResult:
    frame: ErrorTableau
    x_fail: bool
    z_fail: bool
    xx_fail: bool | None = None

    @property
    def failed(self) -> bool:
        return self.x_fail or self.z_fail or bool(self.xx_fail)


class OnlineDecoder:
    """Owns the frame, the corrected event volume, and the defect buffer for
    one run.  Layers are pushed in order; chains keep everything in sync."""

    def __init__(
        self,
        layout: CodeLayout,
        raw: DetectionVolume,
        T: int,
        cfg: OnlineConfig,
        sched: LsSchedule | None = None,
    ):
        self.layout = layout
        self.sched = sched
        self.T = T
        self.cfg = cfg
        self.r_max = cfg.r_max if cfg.r_max is not None else 2 * layout.d
        self.resid = raw.ev.copy()
        self.frame = ErrorTableau.zeros(layout, T)
        self.buffer = DefectBuffer()

    # -- frame updates ----------------------------------------------------

    def _absorb_delta(self, delta: ErrorTableau) -> None:
        dev = extract_detection(self.layout, delta, self.sched).ev
        self.resid ^= dev
        for t, r, c in np.argwhere(dev):
            if t < self.buffer.next_t:
                self.buffer.toggle((int(t), int(r), int(c)))

    def write_chain(self, chain) -> None:
        apply_chain(self.frame, chain)
        self._absorb_delta(chain_tableau(self.layout, chain, self.T))

    def apply_inferred(self, inferred, t: int) -> None:
        delta = ErrorTableau.zeros(self.layout, self.T)
        delta.x[t] = inferred.x_on_data
        delta.z[t] = inferred.z_on_data
        delta.mf[t] = inferred.mflip_on_ancx | inferred.mflip_on_ancz
        self.frame = self.frame ^ delta
        self._absorb_delta(delta)

    # -- layer flow --------------------------------------------------------

    def ingest_layer(self, t: int) -> None:
        self.buffer.ingest_layer(self.resid[t], t)

    # -- matching ----------------------------------------------------------

    def greedy_step(self, r_max: int | None = None) -> int:
        """One sweep over radii 1..r_max; returns the number of matches made."""
        if self.buffer.span < self.cfg.th_v:
            return 0
        defects = self.buffer.sorted_defects()
        n = len(defects)
        if n == 0:
            return 0
        t = np.array([d[0] for d in defects], dtype=np.int64)
        r = np.array([d[1] for d in defects], dtype=np.int64)
        c = np.array([d[2] for d in defects], dtype=np.int64)
        typ = np.array(
            [1 if self.layout.cell_kind[d[1], d[2]] == KIND_ANCX else 0 for d in defects],
            dtype=np.uint8,
        )
        bdist = np.array(
            [boundary_plan(self.layout, self.sched, d, self.T)[0] for d in defects],
            dtype=np.int64,
        )
        if self.layout.shape is PatchShape.MERGED_ROUGH:
            compat = np.zeros((n, n), dtype=np.uint8)
            for i in range(n):
                for j in range(i + 1, n):
                    ok = pair_feasible(self.layout, self.sched, defects[i], defects[j], self.T)
                    compat[i, j] = compat[j, i] = 1 if ok else 0
        else:
            compat = np.ones((n, n), dtype=np.uint8)
        rmax = self.r_max if r_max is None else r_max
        matches = kernels.greedy_pass(t, r, c, typ, bdist, compat, rmax, self.cfg.time_weight)
        for i, j in matches:
            if j < 0:
                _, chain = boundary_plan(self.layout, self.sched, defects[i], self.T)
            else:
                chain = pair_chain(self.layout, self.sched, defects[i], defects[j], self.T)
            self.write_chain(chain)
        return len(matches)

    def final_flush(self) -> None:
        """Match everything left, radius unbounded; boundary matches guarantee
        termination."""
        while self.buffer.next_t < self.T + 1:
            self.ingest_layer(self.buffer.next_t)
        guard = 0
        unbounded = 2 * (self.layout.grid_rows + self.layout.grid_cols) + (
            self.cfg.time_weight * (self.T + 2)
        )
        while self.buffer.live:
            made = self.greedy_step(r_max=unbounded)
            guard += 1
            if made == 0 or guard > self.T + 8:
                raise RuntimeError("flush failed to drain the defect buffer")
        assert not self.resid.any()


def _infer(net: ConvNet, window: np.ndarray):
    if net.kind == "binary":
        return conv_forward_binary(net, window)
    return conv_forward_fp32(net, window)


def run_pipeline(
    layout: CodeLayout,
    tableau: ErrorTableau,
    net: ConvNet | None,
    cfg: OnlineConfig,
    sched: LsSchedule | None = None,
) -> PipelineResult:
    """Per-cycle decode of one run; after the last layer, flush and judge."""
    if net is not None:
        net.validate_decoder()
    T = tableau.cycles
    raw = extract_detection(layout, tableau, sched)
    dec = OnlineDecoder(layout, raw, T, cfg, sched)
    L = T + 1
    lag = (net.K - 1) if net is not None else 0

    def nn_pass(target: int) -> None:
        window = build_window(DetectionVolume(dec.resid), layout, target, net.K)
        inferred = threshold_outputs(_infer(net, window), layout)
        if inferred.any():
            dec.apply_inferred(inferred, target)

    for layer in range(L):
        if net is not None:
            target = layer - lag
            if 0 <= target < T:
                nn_pass(target)
            if layer == L - 1:
                for target in range(max(layer - lag + 1, 0), T):
                    nn_pass(target)
        while dec.buffer.next_t <= layer - (lag if layer < L - 1 else 0):
            dec.ingest_layer(dec.buffer.next_t)
        dec.greedy_step()
    dec.final_flush()

    residual = tableau ^ dec.frame
    verdict = judge_logical(layout, residual, sched, check=False)
    xx = None
    if layout.shape is PatchShape.MERGED_ROUGH:
        xx = ls_logical_xx(layout, tableau, sched, dec.frame) != 0
    return PipelineResult(frame=dec.frame, xx_fail=xx, **verdict)
