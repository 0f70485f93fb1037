"""Exact minimum-weight perfect matching reference for small defect counts.

Pairwise weights are space-time grid distances (|dr| + |dc| + |dt|, two grid
units per data step); boundary weights count data steps to the nearest
absorbing boundary of the matching type.  The optimum is found by dynamic
programming over defect subsets, so instances are capped at 20 defects per
type and larger ones raise CapacityExceeded — an explicit failure mode at
high p or d rather than an approximation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .corrections import apply_chain, boundary_plan, pair_chain
from .lattice import (
    KIND_ANCX,
    KIND_ANCZ,
    CodeLayout,
    ErrorTableau,
    PatchShape,
    extract_detection,
    judge_logical,
)

MAX_DEFECTS = 20


class CapacityExceeded(RuntimeError):
    def __init__(self, n: int):
        super().__init__(f"{n} defects exceed the exact-matching capacity of {MAX_DEFECTS}")
        self.n = n


@dataclass
class MatchingProblem:
    defects: list[tuple[int, int, int]]
    pairwise_w: np.ndarray  # int64 (n, n)
    boundary_w: np.ndarray  # int64 (n,)


def build_problem(
    layout: CodeLayout, defects: list[tuple[int, int, int]], kind: int
) -> MatchingProblem:
    """Weights for one defect type; `kind` is KIND_ANCX or KIND_ANCZ."""
    for d in defects:
        if layout.cell_kind[d[1], d[2]] != kind:
            raise ValueError(f"defect {d} does not sit on the requested ancilla type")
    n = len(defects)
    w = np.zeros((n, n), dtype=np.int64)
    b = np.zeros(n, dtype=np.int64)
    H, W = layout.grid_rows, layout.grid_cols
    for i, (t, r, c) in enumerate(defects):
        if kind == KIND_ANCZ:
            b[i] = min((r + 1) // 2, (H - r) // 2)
        else:
            b[i] = min((c + 1) // 2, (W - c) // 2)
        for j, (t2, r2, c2) in enumerate(defects):
            w[i, j] = abs(r - r2) + abs(c - c2) + abs(t - t2)
    return MatchingProblem(list(defects), w, b)


def solve_exact(problem: MatchingProblem) -> np.ndarray:
    """Optimal assignment vector: assignment[i] = partner index or n for the
    boundary.  Ties resolve to the lexicographically smallest assignment, with
    pairing preferred over the boundary."""
    n = len(problem.defects)
    if n > MAX_DEFECTS:
        raise CapacityExceeded(n)
    return kernels.mwpm_solve(problem.pairwise_w, problem.boundary_w)


def matching_cost(problem: MatchingProblem, assign: np.ndarray) -> int:
    n = len(problem.defects)
    total = 0
    for i in range(n):
        j = int(assign[i])
        if j == n:
            total += int(problem.boundary_w[i])
        elif j > i:
            total += int(problem.pairwise_w[i, j])
    return total


def mwpm_decode(layout: CodeLayout, tableau: ErrorTableau) -> dict:
    """Batch decode of a full run: exact matching per defect type, corrections
    along L-shaped minimal paths, then the logical verdict."""
    if layout.shape is not PatchShape.SINGLE:
        raise ValueError("the exact matching reference handles single patches only")
    T = tableau.cycles
    vol = extract_detection(layout, tableau)
    frame = ErrorTableau.zeros(layout, T, merged=False)
    for kind, mask in ((KIND_ANCX, layout.ancx_mask), (KIND_ANCZ, layout.ancz_mask)):
        hot = np.argwhere(vol.ev & mask)
        defects = sorted((int(t), int(r), int(c)) for t, r, c in hot)
        problem = build_problem(layout, defects, kind)
        assign = solve_exact(problem)
        n = len(defects)
        for i in range(n):
            j = int(assign[i])
            if j == n:
                _, chain = boundary_plan(layout, None, defects[i], T)
            elif j > i:
                chain = pair_chain(layout, None, defects[i], defects[j], T)
            else:
                continue
            apply_chain(frame, chain)
    residual = tableau ^ frame
    verdict = judge_logical(layout, residual, check=False)
    return {"frame": frame, **verdict}
