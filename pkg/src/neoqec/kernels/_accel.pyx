# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: bit-packed XNOR convolution, subset-DP matching,
greedy sweep, and the bit-serial counter model.  Contracts and results match
neoqec.kernels.pure exactly."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define NEOQEC_POPCOUNT64(x) __builtin_popcountll(x)
    #else
    static inline int NEOQEC_POPCOUNT64(unsigned long long x) {
        x = x - ((x >> 1) & 0x5555555555555555ULL);
        x = (x & 0x3333333333333333ULL) + ((x >> 2) & 0x3333333333333333ULL);
        x = (x + (x >> 4)) & 0x0F0F0F0F0F0F0F0FULL;
        return (int)((x * 0x0101010101010101ULL) >> 56);
    }
    #endif
    """
    int NEOQEC_POPCOUNT64(unsigned long long x) nogil

ctypedef unsigned long long u64


def binary_conv_layer(x, w, thresholds):
    """Bit-packed XNOR/popcount convolution; see pure.binary_conv_layer."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=3] xv = np.ascontiguousarray(x, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=4] wv = np.ascontiguousarray(w, dtype=np.uint8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] tv = np.ascontiguousarray(thresholds, dtype=np.int64)
    cdef int cout = wv.shape[0], cin = wv.shape[1], kh = wv.shape[2], kw = wv.shape[3]
    cdef int H = xv.shape[1], W = xv.shape[2]
    cdef int F = cin * kh * kw
    cdef int nwords = (F + 63) // 64
    cdef int ph = kh // 2, pw = kw // 2

    cdef cnp.ndarray[cnp.uint64_t, ndim=2] wpack = np.zeros((cout, nwords), dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] mask = np.zeros(nwords, dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] patch = np.zeros(nwords, dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=3] out = np.zeros((cout, H, W), dtype=np.uint8)

    cdef int oc, ic, dr, dc, bit, r0, c0, rr, cc, wi, pop
    cdef u64 one = 1
    for bit in range(F):
        mask[bit >> 6] |= one << (bit & 63)
    for oc in range(cout):
        bit = 0
        for ic in range(cin):
            for dr in range(kh):
                for dc in range(kw):
                    if wv[oc, ic, dr, dc]:
                        wpack[oc, bit >> 6] |= one << (bit & 63)
                    bit += 1

    with nogil:
        for r0 in range(H):
            for c0 in range(W):
                for wi in range(nwords):
                    patch[wi] = 0
                bit = 0
                for ic in range(cin):
                    for dr in range(kh):
                        rr = r0 + dr - ph
                        if rr < 0 or rr >= H:
                            bit += kw
                            continue
                        for dc in range(kw):
                            cc = c0 + dc - pw
                            if 0 <= cc < W and xv[ic, rr, cc]:
                                patch[bit >> 6] |= one << (bit & 63)
                            bit += 1
                for oc in range(cout):
                    pop = 0
                    for wi in range(nwords):
                        pop += NEOQEC_POPCOUNT64((~(patch[wi] ^ wpack[oc, wi])) & mask[wi])
                    if pop >= tv[oc]:
                        out[oc, r0, c0] = 1
    return out


def mwpm_solve(w, b):
    """Subset-DP exact matching; see pure.mwpm_solve."""
    cdef cnp.ndarray[cnp.int64_t, ndim=2] wv = np.ascontiguousarray(w, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] bv = np.ascontiguousarray(b, dtype=np.int64)
    cdef int n = bv.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] assign = np.full(n, n, dtype=np.int64)
    if n == 0:
        return assign
    cdef long long full = (<long long>1 << n) - 1
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cost = np.zeros(full + 1, dtype=np.int64)
    cdef long long S, rest, sj
    cdef long long best, cand, total
    cdef int i, j, chosen
    with nogil:
        for S in range(1, full + 1):
            i = 0
            while not (S >> i) & 1:
                i += 1
            rest = S & ~(<long long>1 << i)
            best = bv[i] + cost[rest]
            sj = rest
            while sj:
                j = 0
                while not (sj >> j) & 1:
                    j += 1
                sj &= sj - 1
                cand = wv[i, j] + cost[rest & ~(<long long>1 << j)]
                if cand < best:
                    best = cand
            cost[S] = best
    S = full
    while S:
        i = 0
        while not (S >> i) & 1:
            i += 1
        rest = S & ~(<long long>1 << i)
        total = cost[S]
        chosen = -1
        sj = rest
        while sj:
            j = 0
            while not (sj >> j) & 1:
                j += 1
            sj &= sj - 1
            if wv[i, j] + cost[rest & ~(<long long>1 << j)] == total:
                chosen = j
                break
        if chosen >= 0:
            assign[i] = chosen
            assign[chosen] = i
            S = rest & ~(<long long>1 << chosen)
        else:
            assign[i] = n
            S = rest
    return assign


def greedy_pass(t, r, c, typ, bdist, compat, r_max, time_weight):
    """Greedy radius sweep; see pure.greedy_pass."""
    cdef cnp.ndarray[cnp.int64_t, ndim=1] tv = np.ascontiguousarray(t, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] rv = np.ascontiguousarray(r, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cv = np.ascontiguousarray(c, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] gv = np.ascontiguousarray(typ, dtype=np.uint8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] bv = np.ascontiguousarray(bdist, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] pv = np.ascontiguousarray(compat, dtype=np.uint8)
    cdef int n = tv.shape[0]
    cdef int rmax = r_max, tw = time_weight
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] alive = np.ones(n, dtype=np.uint8)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] buf = np.empty((n, 2), dtype=np.int64)
    cdef int m = 0
    cdef int rho, i, j, best_j
    cdef long long dd, best_d
    with nogil:
        for rho in range(1, rmax + 1):
            for i in range(n):
                if not alive[i]:
                    continue
                best_j = -1
                best_d = -1
                for j in range(n):
                    if j == i or not alive[j] or gv[j] != gv[i] or not pv[i, j]:
                        continue
                    dd = llabs(rv[i] - rv[j]) + llabs(cv[i] - cv[j]) + tw * llabs(tv[i] - tv[j])
                    if dd <= rho and (best_d < 0 or dd < best_d):
                        best_d = dd
                        best_j = j
                if best_j >= 0:
                    buf[m, 0] = i
                    buf[m, 1] = best_j
                    m += 1
                    alive[i] = 0
                    alive[best_j] = 0
                elif bv[i] <= rho:
                    buf[m, 0] = i
                    buf[m, 1] = -1
                    m += 1
                    alive[i] = 0
    return buf[:m].copy()


cdef extern from "stdlib.h":
    long long llabs(long long) nogil


def npu_sim(wb, xb, threshold, k):
    """Cycle-accurate TFF-chain counter model; see pure.npu_sim."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] wv = np.ascontiguousarray(wb, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] xv = np.ascontiguousarray(xb, dtype=np.uint8)
    cdef int N = wv.shape[0], kk = k, T = threshold
    cdef long long preload = ((<long long>1 << (kk - 1)) - T) % (<long long>1 << kk)
    if preload < 0:
        preload += <long long>1 << kk
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] bits = np.zeros(kk, dtype=np.uint8)
    cdef int i, pos, sticky = 0, increments = 0
    for i in range(kk):
        bits[i] = (preload >> i) & 1
    with nogil:
        for i in range(N):
            if wv[i] == xv[i]:
                increments += 1
                pos = 0
                while pos < kk:
                    bits[pos] ^= 1
                    if bits[pos] == 1:
                        if pos == kk - 1:
                            sticky = 1
                        break
                    pos += 1
    assert increments < (1 << kk), "counter overflow: 2^k must exceed N"
    act = 1 if T == 0 else sticky
    return act, N + 2
