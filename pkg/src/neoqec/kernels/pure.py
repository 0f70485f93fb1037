"""Pure numpy/Python reference implementations of the hot kernels.

Semantics here are the contract; the Cython backend must match bit-for-bit.
"""

from __future__ import annotations

import numpy as np


def binary_conv_layer(x: np.ndarray, w: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """XNOR/popcount convolution over the {0,1} alphabet with zero padding.

    x: uint8 (Cin, H, W); w: uint8 (Cout, Cin, kh, kw); thresholds: (Cout,).
    Output bit = 1 iff the number of XNOR agreements over the full receptive
    field (padding contributes input bit 0) reaches the channel threshold.

    Uses the exact integer identity popcount = F - sum(w) - sum(x) + 2*(w.x)
    instead of explicit bit packing.
    """
    cout, cin, kh, kw = w.shape
    _, H, W = x.shape
    F = cin * kh * kw
    ph, pw = kh // 2, kw // 2
    xp = np.zeros((cin, H + 2 * ph, W + 2 * pw), dtype=np.int32)
    xp[:, ph:ph + H, pw:pw + W] = x
    # im2col: (H*W, Cin*kh*kw)
    cols = np.empty((H * W, F), dtype=np.int32)
    idx = 0
    for ic in range(cin):
        for dr in range(kh):
            for dc in range(kw):
                cols[:, idx] = xp[ic, dr:dr + H, dc:dc + W].reshape(-1)
                idx += 1
    wf = w.reshape(cout, F).astype(np.int32)
    corr = cols @ wf.T  # (H*W, Cout)
    pop = F - wf.sum(axis=1)[None, :] - cols.sum(axis=1)[:, None] + 2 * corr
    out = pop >= np.asarray(thresholds, dtype=np.int64)[None, :]
    return out.T.reshape(cout, H, W).astype(np.uint8)


def mwpm_solve(w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact minimum-weight matching with boundary by DP over defect subsets.

    w: int64 (n, n) pairwise weights; b: int64 (n,) boundary weights.
    Returns assignment[i] = partner index, or n for a boundary match.  Ties
    resolve to the lexicographically smallest assignment vector, with pairing
    preferred over the boundary (the boundary sentinel n sorts last).
    """
    n = len(b)
    assign = np.full(n, n, dtype=np.int64)
    if n == 0:
        return assign
    cost: dict[int, int] = {0: 0}

    def f(S: int) -> int:
        got = cost.get(S)
        if got is not None:
            return got
        i = (S & -S).bit_length() - 1
        rest = S & ~(1 << i)
        best = b[i] + f(rest)
        Sj = rest
        while Sj:
            j = (Sj & -Sj).bit_length() - 1
            Sj &= Sj - 1
            cand = w[i, j] + f(rest & ~(1 << j))
            if cand < best:
                best = cand
        cost[S] = best
        return best

    S = (1 << n) - 1
    f(S)
    while S:
        i = (S & -S).bit_length() - 1
        rest = S & ~(1 << i)
        total = cost[S]
        chosen = -1
        Sj = rest
        while Sj:
            j = (Sj & -Sj).bit_length() - 1
            Sj &= Sj - 1
            if w[i, j] + f(rest & ~(1 << j)) == total:
                chosen = j
                break
        if chosen >= 0:
            assign[i] = chosen
            assign[chosen] = i
            S = rest & ~(1 << chosen)
        else:
            assign[i] = n
            S = rest
    return assign


def greedy_pass(
    t: np.ndarray,
    r: np.ndarray,
    c: np.ndarray,
    typ: np.ndarray,
    bdist: np.ndarray,
    compat: np.ndarray,
    r_max: int,
    time_weight: int,
) -> np.ndarray:
    """One greedy sweep over radii 1..r_max.

    Defects must be pre-sorted lexicographically by (t, r, c).  For each
    radius, unmatched defects are scanned in order; a defect takes the nearest
    compatible unmatched partner within the radius (ties to the smallest
    index), else its boundary if within reach.  Returns (m, 2) int64 rows
    (i, j) with j = -1 for a boundary match.
    """
    n = len(t)
    alive = np.ones(n, dtype=bool)
    out = []
    for rho in range(1, r_max + 1):
        for i in range(n):
            if not alive[i]:
                continue
            best_j = -1
            best_d = None
            for j in range(n):
                if j == i or not alive[j] or typ[j] != typ[i] or not compat[i, j]:
                    continue
                dd = abs(int(r[i]) - int(r[j])) + abs(int(c[i]) - int(c[j])) + time_weight * abs(
                    int(t[i]) - int(t[j])
                )
                if dd <= rho and (best_d is None or dd < best_d):
                    best_d = dd
                    best_j = j
            if best_j >= 0:
                out.append((i, best_j))
                alive[i] = False
                alive[best_j] = False
            elif bdist[i] <= rho:
                out.append((i, -1))
                alive[i] = False
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def npu_sim(wb: np.ndarray, xb: np.ndarray, threshold: int, k: int) -> tuple[int, int]:
    """Cycle-accurate model of the bit-serial XNOR unit plus k-bit TFF counter.

    The counter is preloaded to (2^(k-1) - threshold) mod 2^k; each XNOR
    agreement ripples an increment through the TFF chain one cycle after the
    inputs arrive, and the readout DFF latches the carry pulse emitted when
    bit k-1 toggles 0 -> 1 (which happens exactly when the agreement count
    reaches the threshold).  threshold 0 bypasses the counter (always fires).
    Returns (activation, cycle_count) with cycle_count = N + 2.
    """
    N = len(wb)
    preload = ((1 << (k - 1)) - threshold) % (1 << k)
    bits = [(preload >> i) & 1 for i in range(k)]
    sticky = 0
    increments = 0
    for i in range(N):
        if wb[i] == xb[i]:  # XNOR agreement arrives at the counter next cycle
            increments += 1
            pos = 0
            while pos < k:
                bits[pos] ^= 1
                if bits[pos] == 1:
                    if pos == k - 1:
                        sticky = 1
                    break
                pos += 1
    assert increments < (1 << k), "counter overflow: 2^k must exceed N"
    act = 1 if threshold == 0 else sticky
    return act, N + 2
