import numpy as np

from neoqec.corrections import (
    boundary_plan,
    chain_tableau,
    pair_chain,
)
from neoqec.lattice import (
    PatchShape,
    build_layout,
    build_ls_schedule,
    extract_detection,
)


def signature(layout, sched, chain, T):
    return extract_detection(layout, chain_tableau(layout, chain, T), sched).ev


def events_of(ev):
    return set(map(tuple, np.argwhere(ev)))


def sample_defect(layout, sched, rng, T):
    anc = np.argwhere(layout.ancx_mask | layout.ancz_mask)
    while True:
        r, c = map(int, anc[rng.integers(len(anc))])
        if sched is not None and layout.seam_ancx_mask[r, c]:
            t = int(rng.integers(sched.merge_start, sched.merge_end))
        else:
            t = int(rng.integers(0, T + 1))
        return (t, r, c)


def run_signature_fuzz(layout, sched, T, n_cases, seed):
    rng = np.random.default_rng(seed)
    pair_hits = 0
    for _ in range(n_cases):
        d1 = sample_defect(layout, sched, rng, T)
        d2 = sample_defect(layout, sched, rng, T)
        # boundary chains must always resolve exactly their defect
        for d in (d1, d2):
            dist, chain = boundary_plan(layout, sched, d, T)
            assert dist >= 1
            assert events_of(signature(layout, sched, chain, T)) == {d}
        if d1 == d2:
            continue
        chain = pair_chain(layout, sched, d1, d2, T)
        if chain is None:
            continue
        pair_hits += 1
        assert events_of(signature(layout, sched, chain, T)) == {d1, d2}
    assert pair_hits > n_cases // 4  # the fuzz actually exercised pairing


def test_chain_signatures_single():
    for d in (3, 5):
        layout = build_layout(d)
        run_signature_fuzz(layout, None, T=d, n_cases=300, seed=d)


def test_chain_signatures_merged():
    layout = build_layout(3, PatchShape.MERGED_ROUGH)
    sched = build_ls_schedule(3)
    run_signature_fuzz(layout, sched, T=sched.total_cycles, n_cases=400, seed=17)


def test_pair_chain_example_geometry():
    # defects at (t,1,2) and (t,3,2) resolve through the data qubit between them
    layout = build_layout(3)
    chain = pair_chain(layout, None, (1, 1, 2), (1, 3, 2), T=3)
    assert chain == [("x", 1, 2, 2)]


def test_boundary_chain_example_geometry():
    layout = build_layout(3)
    dist, chain = boundary_plan(layout, None, (0, 1, 2), T=3)
    assert dist == 2  # one data step, grid units
    assert chain == [("x", 0, 0, 2)]
    # X-ancilla defects run horizontally
    dist, chain = boundary_plan(layout, None, (0, 2, 3), T=3)
    assert dist == 2
    assert chain == [("z", 0, 2, 4)]


def test_cross_patch_pairs_have_clean_signatures():
    layout = build_layout(3, PatchShape.MERGED_ROUGH)
    sched = build_ls_schedule(3)
    T = sched.total_cycles
    # a pre-merge cross-patch pair resolves with flips on both facing columns;
    # the two seam activation contributions cancel, leaving a clean signature
    chain = pair_chain(layout, sched, (0, 0, 3), (0, 0, 7), T)
    assert chain is not None
    assert events_of(signature(layout, sched, chain, T)) == {(0, 0, 3), (0, 0, 7)}
    # during the merge the same pair is also resolvable
    t = sched.merge_start
    chain = pair_chain(layout, sched, (t, 0, 3), (t, 0, 7), T)
    assert chain is not None
    assert events_of(signature(layout, sched, chain, T)) == {(t, 0, 3), (t, 0, 7)}
