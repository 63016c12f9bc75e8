import math

import numpy as np
import pytest

from conftest import random_upper_arcset
from udrs.cutting import (
    ArcSet,
    CutNode,
    arcset_from_arcs,
    count_intersections_inside,
    hierarchical_cutting,
    net_cell_bound_ok,
    net_sparsity_ok,
    sample_epsilon_approximation,
    sample_epsilon_net_sparse,
    vertical_decomposition,
    weighted_hierarchical_cutting,
)
from udrs.geometry import (
    SIDE,
    Arc,
    Point,
    PseudoTrapezoid,
    classify_arcs_np,
)


def mc_points_in_trap(trap, n, seed):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(trap.x_lo, trap.x_hi, n)
    lo = np.array([trap.bottom_y(x) for x in xs])
    hi = np.array([trap.top_y(x) for x in xs])
    ys = lo + rng.uniform(0, 1, n) * (hi - lo)
    keep = hi > lo
    return xs[keep], ys[keep]


def cover_exactly_once(cells, xs, ys):
    hits = np.zeros(len(xs), dtype=int)
    for c in cells:
        hits += c.contains_np(xs, ys).astype(int)
    return hits


def test_vd_empty_set_returns_sigma(adjacent_frame):
    aset = random_upper_arcset(adjacent_frame, 4, seed=0)
    sigma = aset.root
    cells = vertical_decomposition(aset, sigma, np.zeros(0, dtype=np.int64))
    assert len(cells) == 1
    assert cells[0].x_lo == sigma.x_lo and cells[0].x_hi == sigma.x_hi


def test_vd_single_generic_crossing_gives_four_cells():
    # point cell two rows up: a well-placed center dips into the enlarged cell
    # through the bottom edge and leaves through it again, so the walls at its
    # two endpoints cut two side slabs plus the above/below middle pair
    from udrs.geometry import Square, make_frame
    from udrs.cutting import spanning_arcs_from_centers

    frame = make_frame(Square(0.0, 0.0, SIDE), Square(0.0, 2 * SIDE, SIDE))
    aset, active, _, _ = spanning_arcs_from_centers(
        frame, np.array([[0.35, 0.45]]), "upper")
    assert len(aset) == 1
    sigma = aset.root
    assert sigma.x_lo < aset.x_lo[0] and aset.x_hi[0] < sigma.x_hi
    cells = vertical_decomposition(aset, sigma, np.array([0]))
    assert len(cells) == 4
    xs, ys = mc_points_in_trap(sigma, 20000, seed=2)
    hits = cover_exactly_once(cells, xs, ys)
    assert (hits >= 1).all() and (hits <= 2).all()
    assert (hits == 2).mean() < 0.01  # only points on shared boundaries double-hit


def test_vd_disjoint_cover_many_arcs(adjacent_frame):
    aset = random_upper_arcset(adjacent_frame, 12, seed=3)
    sigma = aset.root
    cells = vertical_decomposition(aset, sigma)
    xs, ys = mc_points_in_trap(sigma, 100_000, seed=4)
    hits = cover_exactly_once(cells, xs, ys)
    assert (hits >= 1).all()
    assert (hits == 1).mean() > 0.999  # boundary-measure double hits only
    # interiors are pairwise disjoint: no cell is crossed by a net arc
    for cell in cells:
        codes = classify_arcs_np(aset.cx, aset.cy, aset.sign, aset.x_lo, aset.x_hi, cell)
        # arcs used in the decomposition never cross their own cells
        assert np.count_nonzero(codes == 0) <= len(aset)


def test_epsilon_approximation_sizes(adjacent_frame):
    aset = random_upper_arcset(adjacent_frame, 64, seed=5)
    rng = np.random.default_rng(0)
    # requested size >= n: the set itself with unit weights
    app = sample_epsilon_approximation(aset, 1 / 16, rng)
    assert len(app) == len(aset)
    assert np.all(app.weights == 1.0)
    one = aset.subset(np.array([0]))
    app1 = sample_epsilon_approximation(one, 1 / 2, rng)
    assert len(app1) == 1 and app1.weights[0] == 1.0


def test_epsilon_approximation_vertex_count_estimate(adjacent_frame):
    """Crossing-density estimate |n_s(S)/|S|^2 - n_s(A)/|A|^2| < eps."""
    aset = random_upper_arcset(adjacent_frame, 500, seed=6)
    n = len(aset)
    rng = np.random.default_rng(7)
    eps = 1 / 2  # small enough c_a/eps^2 to force real sampling
    probes = []
    for s in range(100):
        x0, x1 = np.sort(rng.uniform(aset.root.x_lo, aset.root.x_hi, 2))
        ylo = SIDE + rng.uniform(0, 0.5)
        yhi = min(ylo + rng.uniform(0.05, 0.5), 2 * SIDE)
        if x1 - x0 > 1e-3 and yhi - ylo > 1e-3:
            from udrs.geometry import HorizSegment
            probes.append(PseudoTrapezoid(x0, x1, HorizSegment(yhi), HorizSegment(ylo)))
    all_idx = np.arange(n)
    ok = 0
    trials = 30
    for t in range(trials):
        app = sample_epsilon_approximation(aset, eps, np.random.default_rng(100 + t))
        assert len(app) < n
        good = True
        for sigma in probes[:20]:
            ns = count_intersections_inside(aset, all_idx, sigma)
            na = count_intersections_inside(aset, app.src, sigma)
            if abs(ns / n ** 2 - na / len(app) ** 2) >= eps:
                good = False
                break
        ok += good
    assert ok >= int(0.9 * trials)


def test_epsilon_net_basics(adjacent_frame):
    aset = random_upper_arcset(adjacent_frame, 200, seed=8)
    rng = np.random.default_rng(9)
    empty = aset.subset(np.zeros(0, dtype=np.int64))
    assert len(sample_epsilon_net_sparse(empty, aset.root, 1 / 8, rng)) == 0
    net = sample_epsilon_net_sparse(aset, aset.root, 1 / 8, rng)
    assert len(net) <= math.ceil(40 * math.log(200))


def test_epsilon_net_success_rate(adjacent_frame):
    aset = random_upper_arcset(adjacent_frame, 200, seed=10)
    sigma = aset.root
    eps = 1 / 8
    wins = 0
    trials = 100
    for t in range(trials):
        net = sample_epsilon_net_sparse(aset, sigma, eps, np.random.default_rng(t))
        assert len(net) <= math.ceil(5 / eps * math.log(200))
        if net_cell_bound_ok(aset, net.src, sigma, eps) and net_sparsity_ok(aset, net.src, sigma):
            wins += 1
    assert wins >= 40


def test_epsilon_net_small_sample_often_valid(adjacent_frame):
    """Forced-small nets still usually pass the direct cell-bound check."""
    aset = random_upper_arcset(adjacent_frame, 200, seed=10)
    sigma = aset.root
    eps = 1 / 4
    wins = 0
    trials = 20
    for t in range(trials):
        net = sample_epsilon_net_sparse(aset, sigma, eps, np.random.default_rng(t), size=40)
        assert len(net) == 40
        if net_cell_bound_ok(aset, net.src, sigma, eps) and net_sparsity_ok(aset, net.src, sigma):
            wins += 1
    assert wins >= trials // 2


def recount_crossings(cut):
    """Exact per-cell crossing recount via the shared classifier."""
    aset = cut.aset
    for node in cut.nodes:
        codes = classify_arcs_np(aset.cx, aset.cy, aset.sign, aset.x_lo, aset.x_hi, node.trap)
        expect = set(np.nonzero(codes == 0)[0].tolist())
        got = set(node.cross.tolist())
        assert got == expect, f"crossing list mismatch at level {node.level}"


def check_cutting_invariants(cut, n_samples=20_000, seed=0):
    aset = cut.aset
    total = aset.total_weight()
    xs, ys = mc_points_in_trap(aset.root, n_samples, seed)
    for level, ids in enumerate(cut.levels):
        bound = total / cut.rho ** min(level, len(cut.levels) - 1)
        hits = np.zeros(len(xs), dtype=int)
        for nid in ids:
            node = cut.nodes[nid]
            if aset.weights is None:
                assert len(node.cross) <= total / cut.rho ** level + 1e-9
            else:
                assert aset.weights[node.cross].sum() <= total / cut.rho ** level + 1e-9
            hits += node.trap.contains_np(xs, ys).astype(int)
            if node.parent >= 0:
                par = cut.nodes[node.parent].trap
                assert par.x_lo - 1e-9 <= node.trap.x_lo
                assert node.trap.x_hi <= par.x_hi + 1e-9
        assert (hits >= 1).all(), f"coverage hole at level {level}"
        assert (hits == 1).mean() > 0.999, f"overlap at level {level}"


def test_hierarchical_cutting_r1(adjacent_frame):
    aset = random_upper_arcset(adjacent_frame, 32, seed=11)
    cut = hierarchical_cutting(aset, 1, rng=0)
    assert len(cut.levels) == 1
    assert len(cut.nodes[0].cross) == len(aset)


def test_hierarchical_cutting_bounds_and_nesting(adjacent_frame):
    aset = random_upper_arcset(adjacent_frame, 512, seed=12)
    cut = hierarchical_cutting(aset, 8, rng=1)
    assert len(cut.levels) == 4  # Xi_0..Xi_3
    check_cutting_invariants(cut, seed=13)
    recount_crossings(cut)
    # nesting via sampled points: level-(i+1) cell inside level-i cell
    xs, ys = mc_points_in_trap(aset.root, 2000, seed=14)
    for x, y in zip(xs, ys):
        path = cut.locate_path(x, y)
        assert path is not None and len(path) == len(cut.levels)


def test_cutting_finishing_step_when_r_large(adjacent_frame):
    aset = random_upper_arcset(adjacent_frame, 40, seed=15)
    cut = hierarchical_cutting(aset, len(aset), rng=2)
    for nid in cut.leaf_level:
        assert len(cut.nodes[nid].cross) == 0
    check_cutting_invariants(cut, n_samples=10_000, seed=16)


def test_cutting_size_growth_disjoint_arcs(adjacent_frame):
    """Near-disjoint arcs: leaf count grows near-linearly in r."""
    frame = adjacent_frame
    # concentric-ish centers stacked vertically give pairwise-disjoint arcs
    ys = np.linspace(0.05, SIDE - 0.05, 64)
    centers = np.column_stack([np.full_like(ys, SIDE / 2 + 0.001), ys])
    from udrs.cutting import spanning_arcs_from_centers
    aset, _, _, _ = spanning_arcs_from_centers(frame, centers, "upper")
    assert count_intersections_inside(aset, np.arange(len(aset)), aset.root) == 0
    sizes = []
    for r in (2, 4, 8, 16):
        cut = hierarchical_cutting(aset, r, rng=3)
        sizes.append(len(cut.leaf_level))
    logs = np.log(sizes)
    logr = np.log([2, 4, 8, 16])
    slope = np.polyfit(logr, logs, 1)[0]
    assert slope <= 2.3


def test_weighted_cutting_equal_weights_match(adjacent_frame):
    aset = random_upper_arcset(adjacent_frame, 128, seed=17)
    aset.weights = np.ones(len(aset))
    cut = weighted_hierarchical_cutting(aset, 8, rng=4)
    check_cutting_invariants(cut, n_samples=10_000, seed=18)


def test_weighted_cutting_heavy_arc_isolated(adjacent_frame):
    aset = random_upper_arcset(adjacent_frame, 64, seed=19)
    w = np.ones(len(aset))
    heavy = 7
    w[heavy] = 99.0 * (len(aset) - 1)  # ~99% of the total weight
    aset.weights = w
    cut = weighted_hierarchical_cutting(aset, 4, rng=5)
    for nid in cut.leaf_level:
        node = cut.nodes[nid]
        assert heavy not in set(node.cross.tolist())
    check_cutting_invariants(cut, n_samples=10_000, seed=20)


def test_weighted_cutting_round_robin_powers(adjacent_frame):
    aset = random_upper_arcset(adjacent_frame, 256, seed=21)
    w = np.array([2.0 ** (i % 8) for i in range(len(aset))])
    aset.weights = w
    cut = weighted_hierarchical_cutting(aset, 8, rng=6)
    total = w.sum()
    for level, ids in enumerate(cut.levels):
        for nid in ids:
            assert w[cut.nodes[nid].cross].sum() <= total / 2 ** level + 1e-9
    check_cutting_invariants(cut, n_samples=10_000, seed=22)


def test_cutting_c_max_recorded(adjacent_frame):
    aset = random_upper_arcset(adjacent_frame, 512, seed=23)
    cut = hierarchical_cutting(aset, 32, rng=7)
    assert 1 <= cut.c_max <= 64
