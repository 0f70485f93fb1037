"""Planar surface-code geometry, phenomenological noise, and syndrome extraction.

Grid convention (fixed project-wide): each patch is a (2d-1) x (2d-1) cell
grid.  Data qubits sit where (r+c) is even, ancillas where (r+c) is odd;
Z-type ancillas occupy odd rows, X-type ancillas even rows.  A Z ancilla
checks the X component of errors on its in-grid 4-neighbourhood, an X ancilla
the Z component.  Under this convention undetectable X chains run vertically
and terminate on the first/last row (the X boundary); undetectable Z chains
run horizontally and terminate on the first/last column (the Z boundary).

The merged-rough layout joins two patches across a one-column junction: the
junction column holds d-1 sandwiched data qubits (odd rows) and d seam X
ancillas (even rows) that are measured only during the merge window.

Randomness contract: all noise is drawn from Philox4x64-10 keyed by
(seed, trial_index), so a trial is reproducible from those two integers alone
and trials are independent streams.  The draw order (data uniforms, then
ancilla uniforms, then sandwich-measurement uniforms) is part of the contract.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

KIND_DATA = 0
KIND_ANCX = 1
KIND_ANCZ = 2
KIND_VOID = 3


class PatchShape(Enum):
    SINGLE = "single"
    MERGED_ROUGH = "merged-rough"


class LayoutError(ValueError):
    pass


class ResidualSyndromeError(RuntimeError):
    """judge_logical was handed a residual with a non-trivial syndrome."""


@dataclass(frozen=True)
class LsSchedule:
    """Merge-and-split timing: d idle cycles, d merged cycles, d split cycles.

    The sandwiched qubits are prepared in |0> at the start of the merge window
    and measured in the Z basis when the split begins; the logical XX outcome
    is read from the seam X-stabilizer outcomes of the first merged cycle.
    """

    d: int
    merge_start: int
    merge_end: int
    total_cycles: int

    @property
    def logical_xx_parity_cycle(self) -> int:
        return self.merge_start

    def in_merge(self, t: int) -> bool:
        return self.merge_start <= t < self.merge_end


def build_ls_schedule(d: int) -> LsSchedule:
    return LsSchedule(d=d, merge_start=d, merge_end=2 * d, total_cycles=3 * d)


@dataclass(frozen=True)
class CodeLayout:
    d: int
    shape: PatchShape
    grid_rows: int
    grid_cols: int
    cell_kind: np.ndarray  # uint8 (H, W)
    data_mask: np.ndarray  # bool (H, W)
    ancx_mask: np.ndarray
    ancz_mask: np.ndarray
    x_boundary_mask: np.ndarray  # data cells on first/last row of each patch
    z_boundary_mask: np.ndarray  # data cells on first/last column of each patch
    # (pauli_type, support) pairs; one X and one Z chain per patch.  The Z
    # chains are the supports used to judge X failures and vice versa.
    logical_ops: tuple[tuple[str, frozenset[tuple[int, int]]], ...]
    sandwich_mask: np.ndarray = field(default=None, repr=False)  # junction data
    seam_ancx_mask: np.ndarray = field(default=None, repr=False)  # merge-only AncX

    @property
    def n_data(self) -> int:
        return int(self.data_mask.sum())

    @property
    def n_ancx(self) -> int:
        return int(self.ancx_mask.sum())

    @property
    def n_ancz(self) -> int:
        return int(self.ancz_mask.sum())

    @property
    def seam_col(self) -> int | None:
        return self.grid_cols // 2 if self.shape is PatchShape.MERGED_ROUGH else None

    def stabilizer_support(self, r: int, c: int) -> list[tuple[int, int]]:
        """In-grid data neighbours of the ancilla at (r, c)."""
        if self.cell_kind[r, c] not in (KIND_ANCX, KIND_ANCZ):
            raise LayoutError(f"({r}, {c}) is not an ancilla cell")
        out = []
        for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if 0 <= rr < self.grid_rows and 0 <= cc < self.grid_cols:
                out.append((rr, cc))
        return out


def _parity_kind(H: int, W: int) -> np.ndarray:
    r = np.arange(H)[:, None]
    c = np.arange(W)[None, :]
    kind = np.full((H, W), KIND_DATA, dtype=np.uint8)
    anc = (r + c) % 2 == 1
    kind[anc & (r % 2 == 0)] = KIND_ANCX
    kind[anc & (r % 2 == 1)] = KIND_ANCZ
    return kind


def build_layout(d: int, shape: PatchShape = PatchShape.SINGLE) -> CodeLayout:
    if d < 3 or d % 2 == 0:
        raise LayoutError(f"code distance must be odd and >= 3, got {d}")
    H = 2 * d - 1
    W = H if shape is PatchShape.SINGLE else 2 * H + 1
    kind = _parity_kind(H, W)
    data = kind == KIND_DATA
    ancx = kind == KIND_ANCX
    ancz = kind == KIND_ANCZ

    xb = np.zeros((H, W), dtype=bool)
    xb[0, :] = True
    xb[H - 1, :] = True
    xb &= data

    zb = np.zeros((H, W), dtype=bool)
    if shape is PatchShape.SINGLE:
        z_cols = (0, W - 1)
    else:
        # first/last column of each patch
        z_cols = (0, H - 1, H + 1, W - 1)
    for c in z_cols:
        zb[:, c] = True
    zb &= data

    def col_support(c0: int) -> frozenset[tuple[int, int]]:
        return frozenset((r, c0) for r in range(0, H, 2))

    def row_support(c_lo: int, c_hi: int) -> frozenset[tuple[int, int]]:
        return frozenset((0, c) for c in range(c_lo, c_hi + 1, 2))

    if shape is PatchShape.SINGLE:
        logical = (("X", col_support(0)), ("Z", row_support(0, W - 1)))
        sandwich = np.zeros((H, W), dtype=bool)
        seam = np.zeros((H, W), dtype=bool)
    else:
        logical = (
            ("X", col_support(0)),
            ("Z", row_support(0, H - 1)),
            ("X", col_support(H + 1)),
            ("Z", row_support(H + 1, W - 1)),
        )
        seam_col = W // 2
        sandwich = np.zeros((H, W), dtype=bool)
        sandwich[1::2, seam_col] = True
        seam = np.zeros((H, W), dtype=bool)
        seam[0::2, seam_col] = True

    for m in (kind, data, ancx, ancz, xb, zb, sandwich, seam):
        m.setflags(write=False)
    return CodeLayout(
        d=d,
        shape=shape,
        grid_rows=H,
        grid_cols=W,
        cell_kind=kind,
        data_mask=data,
        ancx_mask=ancx,
        ancz_mask=ancz,
        x_boundary_mask=xb,
        z_boundary_mask=zb,
        logical_ops=logical,
        sandwich_mask=sandwich,
        seam_ancx_mask=seam,
    )


@dataclass(frozen=True)
class NoiseParams:
    p: float
    seed: int
    trial_index: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")


@dataclass
class ErrorTableau:
    """Per-(cycle, cell) Pauli record; doubles as the Pauli frame.

    x/z are nonzero only on data cells, mf only on ancilla cells.  smf holds
    the sandwich-qubit Z-measurement flips of a merged run (one bit per
    sandwiched qubit, independent of cycle).
    """

    x: np.ndarray  # bool (T, H, W)
    z: np.ndarray
    mf: np.ndarray
    smf: np.ndarray | None = None  # bool (H, W), merged layouts only

    @property
    def cycles(self) -> int:
        return self.x.shape[0]

    @classmethod
    def zeros(cls, layout: CodeLayout, T: int, merged: bool | None = None) -> "ErrorTableau":
        if merged is None:
            merged = layout.shape is PatchShape.MERGED_ROUGH
        shp = (T, layout.grid_rows, layout.grid_cols)
        smf = np.zeros(shp[1:], dtype=bool) if merged else None
        return cls(np.zeros(shp, bool), np.zeros(shp, bool), np.zeros(shp, bool), smf)

    def copy(self) -> "ErrorTableau":
        return ErrorTableau(
            self.x.copy(), self.z.copy(), self.mf.copy(),
            None if self.smf is None else self.smf.copy(),
        )

    def __xor__(self, other: "ErrorTableau") -> "ErrorTableau":
        if self.x.shape != other.x.shape:
            raise ValueError("tableau dimension mismatch")
        if (self.smf is None) != (other.smf is None):
            raise ValueError("tableau sandwich-record mismatch")
        smf = None if self.smf is None else self.smf ^ other.smf
        return ErrorTableau(self.x ^ other.x, self.z ^ other.z, self.mf ^ other.mf, smf)


def apply_frame(tableau: ErrorTableau, frame: ErrorTableau) -> ErrorTableau:
    """XOR-combine an error record with a Pauli frame."""
    return tableau ^ frame


@dataclass
class DetectionVolume:
    """Detection events per ancilla per layer; layer T is the final perfect round."""

    ev: np.ndarray  # bool (T+1, H, W), true only on ancilla cells

    @property
    def layers(self) -> int:
        return self.ev.shape[0]

    def __xor__(self, other: "DetectionVolume") -> "DetectionVolume":
        return DetectionVolume(self.ev ^ other.ev)


_MASK64 = (1 << 64) - 1


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Philox4x64-10 keyed directly by (seed, trial_index)."""
    key = np.array([seed & _MASK64, trial_index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _active_masks(layout: CodeLayout, sched: LsSchedule | None, T: int):
    """(data_active, anc_active) stacks of shape (T, H, W) / (T+1, H, W)."""
    H, W = layout.grid_rows, layout.grid_cols
    data = np.broadcast_to(layout.data_mask, (T, H, W)).copy()
    anc = np.broadcast_to(layout.ancx_mask | layout.ancz_mask, (T + 1, H, W)).copy()
    if layout.shape is PatchShape.MERGED_ROUGH:
        if sched is None:
            raise LayoutError("merged layout requires an LsSchedule")
        off = np.ones(T + 1, dtype=bool)
        off[sched.merge_start:sched.merge_end] = False
        data[off[:T], :, :] &= ~layout.sandwich_mask
        anc[off, :, :] &= ~layout.seam_ancx_mask
    return data, anc


def sample_errors(
    layout: CodeLayout, params: NoiseParams, T: int, sched: LsSchedule | None = None
) -> ErrorTableau:
    """Phenomenological noise: one of X/Y/Z with probability p/3 each per data
    qubit per cycle; an outcome flip with probability 2p/3 per ancilla read.
    Sandwich Z measurements of a merged run flip with probability 2p/3."""
    if T < 1:
        raise ValueError("T must be >= 1")
    p = params.p
    rng = trial_rng(params.seed, params.trial_index)
    H, W = layout.grid_rows, layout.grid_cols
    u = rng.random((T, H, W))
    v = rng.random((T, H, W))
    data_act, anc_act = _active_masks(layout, sched, T)
    x = (u < 2.0 * p / 3.0) & data_act
    z = (u >= p / 3.0) & (u < p) & data_act
    mf = (v < 2.0 * p / 3.0) & anc_act[:T]
    smf = None
    if layout.shape is PatchShape.MERGED_ROUGH:
        w = rng.random((H, W))
        smf = (w < 2.0 * p / 3.0) & layout.sandwich_mask
    return ErrorTableau(x, z, mf, smf)


def _nbr4_xor(g: np.ndarray) -> np.ndarray:
    out = np.zeros_like(g)
    out[..., 1:, :] ^= g[..., :-1, :]
    out[..., :-1, :] ^= g[..., 1:, :]
    out[..., :, 1:] ^= g[..., :, :-1]
    out[..., :, :-1] ^= g[..., :, 1:]
    return out


def extract_detection(
    layout: CodeLayout, tableau: ErrorTableau, sched: LsSchedule | None = None
) -> DetectionVolume:
    """Raw syndromes from cumulative errors, differenced in time, with a final
    perfect round appended.

    The syndrome of an inactive ancilla is 0 by convention, so seam ancillas
    produce an activation event against the reference; after the merge window
    their last value is carried forward (frozen), so deactivation itself emits
    no event and a flip of the last seam read leaves a single defect.  The
    sandwich Z-measurement outcomes fold into the adjacent Z-ancilla syndromes
    from the first split cycle onward.
    """
    T = tableau.cycles
    H, W = layout.grid_rows, layout.grid_cols
    if tableau.x.shape != (T, H, W):
        raise ValueError("tableau does not match layout")
    cumx = np.logical_xor.accumulate(tableau.x, axis=0)
    cumz = np.logical_xor.accumulate(tableau.z, axis=0)
    s = np.zeros((T + 1, H, W), dtype=bool)
    sx = _nbr4_xor(cumx) & layout.ancz_mask
    sz = _nbr4_xor(cumz) & layout.ancx_mask
    s[:T] = (sx | sz) ^ tableau.mf
    s[T] = sx[T - 1] | sz[T - 1]
    if layout.shape is PatchShape.MERGED_ROUGH:
        if sched is None:
            raise LayoutError("merged layout requires an LsSchedule")
        if tableau.smf is not None:
            fold = _nbr4_xor(tableau.smf) & layout.ancz_mask
            s[sched.merge_end:] ^= fold
        seam = layout.seam_ancx_mask
        s[: sched.merge_start, seam] = False
        s[sched.merge_end:, seam] = s[sched.merge_end - 1, seam]
    ev = np.empty_like(s)
    ev[0] = s[0]
    ev[1:] = s[1:] ^ s[:-1]
    return DetectionVolume(ev)


def cumulative_errors(tableau: ErrorTableau) -> tuple[np.ndarray, np.ndarray]:
    """Net X and Z flips per cell over the whole run."""
    return (
        np.logical_xor.reduce(tableau.x, axis=0),
        np.logical_xor.reduce(tableau.z, axis=0),
    )


def judge_logical(
    layout: CodeLayout,
    residual: ErrorTableau,
    sched: LsSchedule | None = None,
    check: bool = True,
) -> dict[str, bool]:
    """Overlap-parity failure test, valid only for syndrome-free residuals.

    x_fail: the net X pattern anticommutes with some patch's logical Z chain
    (odd overlap with a first-row support); z_fail likewise against a logical
    X chain (first-column support).
    """
    if check and extract_detection(layout, residual, sched).ev.any():
        raise ResidualSyndromeError("residual has a non-trivial syndrome")
    net_x, net_z = cumulative_errors(residual)
    x_fail = False
    z_fail = False
    for pauli, support in layout.logical_ops:
        par = sum(1 for (r, c) in support if (net_x if pauli == "Z" else net_z)[r, c]) % 2
        if pauli == "Z":
            x_fail |= bool(par)
        else:
            z_fail |= bool(par)
    return {"x_fail": x_fail, "z_fail": z_fail}


def ls_logical_xx(
    layout: CodeLayout,
    tableau: ErrorTableau,
    sched: LsSchedule,
    frame: ErrorTableau | None = None,
) -> int:
    """Error-induced flip of the logical XX readout, after frame corrections.

    The readout is the parity of the seam X-stabilizer outcomes at the first
    merged cycle; everything is tracked relative to the noise-free reference,
    so 0 means the corrected readout agrees with it.
    """
    if layout.shape is not PatchShape.MERGED_ROUGH:
        raise LayoutError("logical XX readout requires a merged layout")
    t = sched.logical_xx_parity_cycle

    def flips(tab: ErrorTableau) -> int:
        cumz = np.logical_xor.reduce(tab.z[: t + 1], axis=0)
        s = (_nbr4_xor(cumz) ^ tab.mf[t]) & layout.seam_ancx_mask
        return int(s.sum()) % 2

    parity = flips(tableau)
    if frame is not None:
        parity ^= flips(frame)
    return parity
