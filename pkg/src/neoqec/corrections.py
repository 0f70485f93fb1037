"""Correction chains between defects and to boundaries.

A chain is a list of (kind, t, r, c) flips with kind in {"x", "z", "mf"}.
Chains are built so that their detection-event signature is exactly the
defect(s) they resolve: a time segment of measurement flips moves a defect
along its ancilla's world line, a spatial segment of data flips moves it
across the lattice at a single cycle, and chains ending on a boundary (or on
the seam deactivation edge) absorb the defect entirely.

Coordinates follow the lattice convention: Z-ancilla defects are resolved by
X data flips and terminate on the row boundaries; X-ancilla defects by Z data
flips terminating on the column boundaries (phase-aware for merged layouts).
"""

from __future__ import annotations

from .lattice import (
    KIND_ANCX,
    KIND_ANCZ,
    CodeLayout,
    ErrorTableau,
    LsSchedule,
    PatchShape,
)

Defect = tuple[int, int, int]  # (t, r, c)
Chain = list[tuple[str, int, int, int]]


def defect_kind(layout: CodeLayout, defect: Defect) -> int:
    return int(layout.cell_kind[defect[1], defect[2]])


def _active_span(layout: CodeLayout, sched: LsSchedule | None, r: int, c: int, T: int):
    """First/last cycle at which the ancilla at (r, c) is measured."""
    if (
        layout.shape is PatchShape.MERGED_ROUGH
        and sched is not None
        and layout.seam_ancx_mask[r, c]
    ):
        return sched.merge_start, sched.merge_end - 1
    return 0, T - 1


def _col_bounds(layout: CodeLayout, sched: LsSchedule | None, c: int, t: int):
    """(lo, hi, left_ok, right_ok): column range and usable sides for a
    horizontal chain written at cycle t.

    Before the merge window the facing patch columns are not absorbing: a Z
    flip left there would still feed the seam stabilizers once they activate,
    so only the outer boundary may terminate a pre-merge chain.  After the
    split the seam reads are frozen and the facing columns absorb again.
    """
    W = layout.grid_cols
    if layout.shape is not PatchShape.MERGED_ROUGH:
        return 0, W - 1, True, True
    if sched is not None and sched.in_merge(t):
        return 0, W - 1, True, True
    pre_merge = sched is not None and t < sched.merge_start
    seam = layout.seam_col
    if c < seam:
        return 0, seam - 1, True, not pre_merge
    if c > seam:
        return seam + 1, W - 1, not pre_merge, True
    raise ValueError("seam ancilla referenced outside the merge window")


def _vertical_cells(r: int, c: int, H: int, up: bool) -> list[tuple[int, int]]:
    return [(rr, c) for rr in (range(r - 1, -1, -2) if up else range(r + 1, H, 2))]


def _horizontal_cells(r: int, c: int, lo: int, hi: int, left: bool) -> list[tuple[int, int]]:
    return [(r, cc) for cc in (range(c - 1, lo - 1, -2) if left else range(c + 1, hi + 1, 2))]


def _mf_segment(r: int, c: int, t0: int, t1: int) -> Chain:
    return [("mf", tt, r, c) for tt in range(min(t0, t1), max(t0, t1))]


def _spatial_segment(
    layout: CodeLayout, kind: int, t: int, a1: tuple[int, int], a2: tuple[int, int]
) -> Chain:
    """Row segment then column segment between two same-type ancillas at cycle t."""
    pauli = "x" if kind == KIND_ANCZ else "z"
    (r1, c1), (r2, c2) = a1, a2
    cells = []
    lo, hi = sorted((r1, r2))
    cells += [(rr, c1) for rr in range(lo + 1, hi, 2)]
    lo, hi = sorted((c1, c2))
    cells += [(r2, cc) for cc in range(lo + 1, hi, 2)]
    return [(pauli, t, rr, cc) for rr, cc in cells]


def boundary_plan(
    layout: CodeLayout, sched: LsSchedule | None, defect: Defect, T: int
) -> tuple[int, Chain]:
    """Cheapest boundary resolution for a defect: (grid distance, chain).

    Z-ancilla defects run to the nearer row boundary, X-ancilla defects to the
    nearer reachable column boundary; defects on the final (perfect) layer or
    a deactivation edge first step back in time with measurement flips.  Seam
    ancillas may instead retire through the merge-window deactivation edge.
    Grid distances count 2 per data step and time_weight 1 per time step, so
    an adjacent boundary is at distance 2.
    """
    t, r, c = defect
    kind = defect_kind(layout, defect)
    H = layout.grid_rows
    fa, la = _active_span(layout, sched, r, c, T)
    tau = min(t, la)
    chain_prefix = _mf_segment(r, c, tau, t)
    pauli = "x" if kind == KIND_ANCZ else "z"
    if kind == KIND_ANCZ:
        up_cells = _vertical_cells(r, c, H, up=True)
        dn_cells = _vertical_cells(r, c, H, up=False)
        options = [(2 * len(up_cells), up_cells), (2 * len(dn_cells), dn_cells)]
    else:
        lo, hi, left_ok, right_ok = _col_bounds(layout, sched, c, tau)
        options = []
        if left_ok:
            cells = _horizontal_cells(r, c, lo, hi, left=True)
            options.append((2 * len(cells), cells))
        if right_ok:
            cells = _horizontal_cells(r, c, lo, hi, left=False)
            options.append((2 * len(cells), cells))
    dist, cells = min(options, key=lambda o: o[0])
    best = (dist + (t - tau), chain_prefix + [(pauli, tau, rr, cc) for rr, cc in cells])
    if (
        layout.shape is PatchShape.MERGED_ROUGH
        and sched is not None
        and layout.seam_ancx_mask[r, c]
    ):
        # retire through the deactivation edge: flips of every remaining read
        edge = _mf_segment(r, c, t, sched.merge_end)
        if len(edge) < best[0]:
            best = (len(edge), edge)
    return best


def boundary_dist(layout: CodeLayout, sched: LsSchedule | None, defect: Defect, T: int) -> int:
    return boundary_plan(layout, sched, defect, T)[0]


def pair_chain(
    layout: CodeLayout, sched: LsSchedule | None, d1: Defect, d2: Defect, T: int
) -> Chain | None:
    """Chain resolving exactly the two defects, or None if no valid chain exists.

    The spatial hop happens at a single cycle lam chosen inside both ancillas'
    active spans (and inside the merge window when the path crosses sandwiched
    cells); measurement-flip segments connect each defect to lam in time.
    """
    if d2 < d1:
        d1, d2 = d2, d1
    kind = defect_kind(layout, d1)
    if defect_kind(layout, d2) != kind:
        return None
    t1, r1, c1 = d1
    t2, r2, c2 = d2
    _, la1 = _active_span(layout, sched, r1, c1, T)
    _, la2 = _active_span(layout, sched, r2, c2, T)
    lam = min(t2, T - 1, la1, la2)
    spatial = _spatial_segment(layout, kind, 0, (r1, c1), (r2, c2))
    touches_sandwich = layout.shape is PatchShape.MERGED_ROUGH and any(
        layout.sandwich_mask[rr, cc] for _, _, rr, cc in spatial
    )
    if touches_sandwich:
        lam = min(lam, sched.merge_end - 1)
        if lam < sched.merge_start:
            return None
    if lam < 0:
        return None
    for (r, c, la) in ((r1, c1, la1), (r2, c2, la2)):
        fa, _ = _active_span(layout, sched, r, c, T)
        t_end = t1 if (r, c) == (r1, c1) else t2
        lo, hi = min(lam, t_end), max(lam, t_end)
        if lo < fa or hi - 1 > la:
            if hi > lo:  # a non-empty mf segment must stay within the span
                return None
    chain = (
        _mf_segment(r1, c1, t1, lam)
        + _spatial_segment(layout, kind, lam, (r1, c1), (r2, c2))
        + _mf_segment(r2, c2, lam, t2)
    )
    return chain


def pair_feasible(
    layout: CodeLayout, sched: LsSchedule | None, d1: Defect, d2: Defect, T: int
) -> bool:
    return pair_chain(layout, sched, d1, d2, T) is not None


def chain_tableau(layout: CodeLayout, chain: Chain, T: int) -> ErrorTableau:
    tab = ErrorTableau.zeros(layout, T)
    apply_chain(tab, chain)
    return tab


def apply_chain(frame: ErrorTableau, chain: Chain) -> None:
    for kind, t, r, c in chain:
        grid = {"x": frame.x, "z": frame.z, "mf": frame.mf}[kind]
        grid[t, r, c] ^= True
