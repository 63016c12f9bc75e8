"""Hierarchical (1/r)-cuttings for spanning arcs inside an enlarged cell.

A cutting is a refinement chain Xi_0..Xi_k of pseudo-trapezoid tilings of
the enlarged cell.  Level i guarantees that no cell interior is crossed by
more than n/rho^i arcs (total weight W/rho^i in the weighted case).  Each
refinement decomposes a cell along a small random arc sample and validates
the crossing bound directly, resampling on failure, so the guarantee holds
by construction rather than by the sampling analysis alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import (
    Arc,
    CellPairFrame,
    DegeneracyError,
    GeometryError,
    Point,
    PseudoTrapezoid,
    UnitArc,
    _sign,
    circle_circle_points,
    classify_arcs_np,
    clip_half_to_trap,
    curve_y_np,
    boundary_curve,
)


class CuttingError(RuntimeError):
    """Construction failed (retry budget exceeded: degenerate input)."""


class BudgetExceeded(RuntimeError):
    """Operation budget exhausted (used by the doubling driver)."""


@dataclass(eq=False)
class ArcSet:
    """Same-kind spanning arcs in an enlarged cell, optionally weighted."""

    frame: Optional[CellPairFrame]
    kind: str
    cx: np.ndarray
    cy: np.ndarray
    x_lo: np.ndarray
    x_hi: np.ndarray
    root: PseudoTrapezoid
    weights: Optional[np.ndarray] = None
    src: Optional[np.ndarray] = None  # indices into an originating set, if sampled

    def __post_init__(self) -> None:
        _sign(self.kind)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64)
            if len(w) != len(self.cx):
                raise GeometryError("weights length mismatch")
            if not np.isfinite(w).all() or (w < 0).any():
                raise GeometryError("weights must be finite and nonnegative")
            self.weights = w

    def __len__(self) -> int:
        return len(self.cx)

    @property
    def sign(self) -> float:
        return _sign(self.kind)

    def arc(self, i: int) -> Arc:
        return Arc(Point(float(self.cx[i]), float(self.cy[i])), self.kind,
                   float(self.x_lo[i]), float(self.x_hi[i]))

    def arcs(self) -> list[Arc]:
        return [self.arc(i) for i in range(len(self))]

    def total_weight(self) -> float:
        if self.weights is None:
            return float(len(self))
        return float(self.weights.sum())

    def subset(self, idx: np.ndarray) -> "ArcSet":
        w = None if self.weights is None else self.weights[idx]
        return ArcSet(self.frame, self.kind, self.cx[idx], self.cy[idx],
                      self.x_lo[idx], self.x_hi[idx], self.root, w, np.asarray(idx))


def arcset_from_arcs(frame: Optional[CellPairFrame], arcs: list[Arc],
                     root: PseudoTrapezoid, weights=None) -> ArcSet:
    if not arcs:
        return ArcSet(frame, "upper", np.zeros(0), np.zeros(0), np.zeros(0),
                      np.zeros(0), root, None if weights is None else np.zeros(0))
    kind = arcs[0].kind
    if any(a.kind != kind for a in arcs):
        raise GeometryError("mixed arc kinds in one set")
    cx = np.array([a.center.x for a in arcs])
    cy = np.array([a.center.y for a in arcs])
    lo = np.array([a.x_lo for a in arcs])
    hi = np.array([a.x_hi for a in arcs])
    w = None if weights is None else np.asarray(weights, dtype=np.float64)
    return ArcSet(frame, kind, cx, cy, lo, hi, root, w)


def spanning_arcs_from_centers(frame: CellPairFrame, centers: np.ndarray, kind: str):
    """Clip disk boundaries to the enlarged cell; split off trivial points.

    Returns (arcset, active_idx, contain_idx, miss_idx): arcs exist for the
    active centers; disks of contain_idx cover the whole enlarged cell and
    disks of miss_idx avoid it.
    """
    root = frame.enlarged_Cp if kind == "upper" else frame.enlarged_C
    active, contain, miss, arcs = [], [], [], []
    mx, my = root.midpoint()
    for i, (x, y) in enumerate(np.asarray(centers, dtype=np.float64).reshape(-1, 2)):
        span = clip_half_to_trap(float(x), float(y), kind, root)
        if span is not None and span[1] > span[0]:
            active.append(i)
            arcs.append((x, y, span[0], span[1]))
        elif (mx - x) ** 2 + (my - y) ** 2 <= 1.0:
            contain.append(i)
        else:
            miss.append(i)
    if arcs:
        ax, ay, lo, hi = map(np.array, zip(*arcs))
    else:
        ax = ay = lo = hi = np.zeros(0)
    aset = ArcSet(frame, kind, ax, ay, lo, hi, root, src=np.array(active, dtype=np.int64))
    return (aset, np.array(active, dtype=np.int64),
            np.array(contain, dtype=np.int64), np.array(miss, dtype=np.int64))


# ---------------------------------------------------------------------------
# vertical pseudo-trapezoidal decomposition


def _clip_spans(aset: ArcSet, idx: np.ndarray, sigma: PseudoTrapezoid):
    """Clip arcs to sigma; dedup identical circles; returns (kept idx, spans)."""
    seen = {}
    kept, spans = [], []
    for i in idx:
        key = (float(aset.cx[i]), float(aset.cy[i]))
        if key in seen:
            continue
        tb = boundary_curve(sigma.top)
        bb = boundary_curve(sigma.bottom)
        if (tb[0] == "a" and (tb[1], tb[2]) == key) or (bb[0] == "a" and (bb[1], bb[2]) == key):
            continue  # the arc is sigma's own boundary curve
        span = clip_half_to_trap(key[0], key[1], aset.kind, sigma,
                                 float(aset.x_lo[i]), float(aset.x_hi[i]))
        if span is None or span[1] - span[0] <= 1e-12:
            continue
        seen[key] = True
        kept.append(int(i))
        spans.append(span)
    return kept, spans


def vertical_decomposition(aset: ArcSet, sigma: PseudoTrapezoid,
                           idx: Optional[np.ndarray] = None) -> list[PseudoTrapezoid]:
    """Decompose sigma along the given arcs into pseudo-trapezoids.

    Vertical walls are dropped from every clipped-arc endpoint and every
    pairwise intersection inside sigma.  Cells are maximal regions bounded by
    one arc (or sigma's boundary) above and below; they tile sigma.
    """
    if idx is None:
        idx = np.arange(len(aset))
    kept, spans = _clip_spans(aset, np.asarray(idx), sigma)
    sgn = aset.sign
    if not kept:
        return [PseudoTrapezoid(sigma.x_lo, sigma.x_hi, sigma.top, sigma.bottom)]

    events = {sigma.x_lo, sigma.x_hi}
    for lo, hi in spans:
        events.add(lo)
        events.add(hi)
    pts_seen: dict[tuple[float, float], int] = {}
    for a in range(len(kept)):
        for b in range(a + 1, len(kept)):
            ia, ib = kept[a], kept[b]
            for px, py in circle_circle_points(aset.cx[ia], aset.cy[ia],
                                               aset.cx[ib], aset.cy[ib]):
                if sgn * (py - aset.cy[ia]) < -1e-12 or sgn * (py - aset.cy[ib]) < -1e-12:
                    continue
                if not (spans[a][0] <= px <= spans[a][1] and spans[b][0] <= px <= spans[b][1]):
                    continue
                if not sigma.strictly_inside(px, py):
                    continue
                k = (px, py)
                if k in pts_seen:
                    raise DegeneracyError("three arcs through one point")
                pts_seen[k] = 1
                events.add(px)

    xs = sorted(events)
    tcur = boundary_curve(sigma.top)
    bcur = boundary_curve(sigma.bottom)

    cells: list[tuple[float, float, tuple, tuple]] = []
    open_cells: dict[tuple[tuple, tuple], float] = {}
    for x0, x1 in zip(xs[:-1], xs[1:]):
        if x1 <= x0:
            continue
        xm = 0.5 * (x0 + x1)
        active = [j for j in range(len(kept)) if spans[j][0] <= x0 and spans[j][1] >= x1]
        ys = []
        for j in active:
            i = kept[j]
            dx = xm - aset.cx[i]
            ys.append((aset.cy[i] + sgn * math.sqrt(max(0.0, 1.0 - dx * dx)), j))
        ys.sort()
        for (y1, _), (y2, _) in zip(ys[:-1], ys[1:]):
            if y1 == y2:
                raise DegeneracyError("arcs coincide inside a slab")
        keys = [("B",)] + [("a", kept[j]) for _, j in ys] + [("T",)]
        bands = list(zip(keys[:-1], keys[1:]))
        band_set = set(bands)
        for key in list(open_cells):
            if key not in band_set:
                cells.append((open_cells.pop(key), x0, key[0][0] if False else key[0], key[1]))
        for key in bands:
            if key not in open_cells:
                open_cells[key] = x0
    for (bk, tk), start in open_cells.items():
        cells.append((start, xs[-1], bk, tk))

    def resolve(key):
        if key == ("B",):
            return sigma.bottom
        if key == ("T",):
            return sigma.top
        i = key[1]
        return UnitArc(Point(float(aset.cx[i]), float(aset.cy[i])), aset.kind)

    out = []
    for start, end, bk, tk in cells:
        if end - start <= 0:
            continue
        out.append(PseudoTrapezoid(start, end, resolve(tk), resolve(bk)))
    return out


def pairwise_intersections(aset: ArcSet, idx: np.ndarray):
    """All arc-pair intersection points of the subset, as (xs, ys) arrays."""
    idx = np.asarray(idx)
    m = len(idx)
    if m < 2:
        return np.zeros(0), np.zeros(0)
    sgn = aset.sign
    ii, jj = np.triu_indices(m, k=1)
    ax, ay = aset.cx[idx[ii]], aset.cy[idx[ii]]
    bx, by = aset.cx[idx[jj]], aset.cy[idx[jj]]
    dx, dy = bx - ax, by - ay
    d2 = dx * dx + dy * dy
    ok = (d2 > 0.0) & (d2 <= 4.0)
    d = np.sqrt(np.where(ok, d2, 1.0))
    h = np.sqrt(np.maximum(0.0, 1.0 - 0.25 * d2))
    mx, my = ax + 0.5 * dx, ay + 0.5 * dy
    ox, oy = -dy / d * h, dx / d * h
    lo = np.maximum(aset.x_lo[idx[ii]], aset.x_lo[idx[jj]])
    hi = np.minimum(aset.x_hi[idx[ii]], aset.x_hi[idx[jj]])
    xs_out, ys_out = [], []
    for s in (1.0, -1.0):
        px, py = mx + s * ox, my + s * oy
        keep = ok & (sgn * (py - ay) >= -1e-12) & (sgn * (py - by) >= -1e-12)
        keep &= (px >= lo) & (px <= hi)
        xs_out.append(px[keep])
        ys_out.append(py[keep])
    return np.concatenate(xs_out), np.concatenate(ys_out)


def count_intersections_inside(aset: ArcSet, idx: np.ndarray,
                               sigma: Optional[PseudoTrapezoid] = None) -> int:
    """Exact pairwise intersection count (strictly inside sigma if given)."""
    xs, ys = pairwise_intersections(aset, idx)
    if sigma is None or len(xs) == 0:
        return len(xs)
    tcur = boundary_curve(sigma.top)
    bcur = boundary_curve(sigma.bottom)
    inside = (xs > sigma.x_lo) & (xs < sigma.x_hi)
    inside &= (ys > curve_y_np(bcur, xs)) & (ys < curve_y_np(tcur, xs))
    return int(np.count_nonzero(inside))


# ---------------------------------------------------------------------------
# epsilon tools (random sampling; the cutting itself revalidates downstream)


def sample_epsilon_approximation(aset: ArcSet, eps: float, rng: np.random.Generator,
                                 c_a: float = 4.0, c_b: float = 16.0) -> ArcSet:
    """Uniform sample standing in for an eps-approximation.

    Size min(n, c_a*(1/eps^2)*ln(1/eps) + c_b*(1/eps^2)), each kept arc
    weighted n/size so crossing weights estimate crossing counts.
    """
    if not 0.0 < eps < 1.0:
        raise GeometryError("eps must be in (0, 1)")
    n = len(aset)
    if n == 0:
        return aset.subset(np.zeros(0, dtype=np.int64))
    size = min(n, int(math.ceil(c_a / eps ** 2 * math.log(1.0 / eps) + c_b / eps ** 2)))
    size = max(size, 1)
    if size >= n:
        out = aset.subset(np.arange(n))
        out.weights = np.ones(n)
        return out
    idx = np.sort(rng.choice(n, size=size, replace=False))
    out = aset.subset(idx)
    out.weights = np.full(size, n / size)
    return out


def sample_epsilon_net_sparse(aset: ArcSet, sigma: PseudoTrapezoid, eps: float,
                              rng: np.random.Generator,
                              size: Optional[int] = None) -> ArcSet:
    """Random candidate eps-net sparse for sigma.

    Default size min(n, ceil(5/eps * ln n)) succeeds with probability > 1/2;
    callers validate and resample.  `size` overrides for the cutting loop.
    """
    n = len(aset)
    if n == 0:
        return aset.subset(np.zeros(0, dtype=np.int64))
    if size is None:
        if eps <= 0:
            raise GeometryError("eps must be positive")
        size = min(n, int(math.ceil(5.0 / eps * math.log(max(n, 2)))))
    size = max(1, min(n, size))
    p = None
    if aset.weights is not None and aset.weights.sum() > 0:
        p = aset.weights / aset.weights.sum()
        size = min(size, int(np.count_nonzero(p)))
    idx = np.sort(rng.choice(n, size=size, replace=False, p=p))
    return aset.subset(idx)


def net_cell_bound_ok(aset: ArcSet, net_idx: np.ndarray, sigma: PseudoTrapezoid,
                      eps: float, all_idx: Optional[np.ndarray] = None) -> bool:
    """Check the net's working consequence: each VD cell is lightly crossed."""
    if all_idx is None:
        all_idx = np.arange(len(aset))
    if len(net_idx) == len(all_idx):
        return True  # full decomposition: no arc crosses any of its own cells
    cells = vertical_decomposition(aset, sigma, net_idx)
    bound = 4.0 * eps * len(all_idx) + 4.0
    for cell in cells:
        codes = classify_arcs_np(aset.cx[all_idx], aset.cy[all_idx], aset.sign,
                                 aset.x_lo[all_idx], aset.x_hi[all_idx], cell)
        if np.count_nonzero(codes == 0) > bound:
            return False
    return True


def net_sparsity_ok(aset: ArcSet, net_idx: np.ndarray, sigma: PseudoTrapezoid) -> bool:
    ns_all = count_intersections_inside(aset, np.arange(len(aset)), sigma)
    if ns_all == 0:
        return True
    ns_net = count_intersections_inside(aset, net_idx, sigma)
    return ns_net / ns_all <= 4.0 * len(net_idx) ** 2 / len(aset) ** 2


# ---------------------------------------------------------------------------
# the hierarchical cutting engine


@dataclass(eq=False)
class CutNode:
    trap: PseudoTrapezoid
    level: int
    parent: int
    children: list[int] = field(default_factory=list)
    cross: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    inside: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    outside: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))


@dataclass(eq=False)
class HierarchicalCutting:
    aset: ArcSet
    rho: int
    r: float
    nodes: list[CutNode]
    levels: list[list[int]]
    c_max: int = 0
    retries: int = 0
    ops: int = 0

    @property
    def leaf_level(self) -> list[int]:
        return self.levels[-1]

    def leaves(self) -> list[CutNode]:
        return [self.nodes[i] for i in self.levels[-1]]

    def locate_path(self, x: float, y: float) -> Optional[list[int]]:
        """Node ids from root to leaf for the cell chain containing (x, y)."""
        if not self.nodes[0].trap.contains(x, y):
            return None
        path = [0]
        cur = 0
        for _ in range(len(self.levels) - 1):
            nxt = None
            for ch in self.nodes[cur].children:
                if self.nodes[ch].trap.contains(x, y):
                    nxt = ch
                    break
            if nxt is None:
                return None
            path.append(nxt)
            cur = nxt
        return path

    def locate_points(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Leaf node id per point (-1 if outside the root cell)."""
        out = np.full(len(xs), -1, dtype=np.int64)
        root_in = self.nodes[0].trap.contains_np(xs, ys)
        holders = {0: np.nonzero(root_in)[0]}
        for _ in range(len(self.levels) - 1):
            nxt: dict[int, np.ndarray] = {}
            for nid, pts in holders.items():
                if len(pts) == 0:
                    continue
                remaining = pts
                for ch in self.nodes[nid].children:
                    if len(remaining) == 0:
                        break
                    m = self.nodes[ch].trap.contains_np(xs[remaining], ys[remaining])
                    taken = remaining[m]
                    if len(taken):
                        nxt.setdefault(ch, []).append(taken)
                    remaining = remaining[~m]
            holders = {k: np.concatenate(v) for k, v in nxt.items()}
        for nid, pts in holders.items():
            out[pts] = nid
        return out


def _weight_of(aset: ArcSet, idx: np.ndarray) -> float:
    if aset.weights is None:
        return float(len(idx))
    return float(aset.weights[idx].sum())


def _refine_cell(aset: ArcSet, node: CutNode, bound: float, rho0: float,
                 rng: np.random.Generator, max_retries: int,
                 counters: dict) -> list[CutNode]:
    """Split one overloaded cell; returns validated children."""
    cross = node.cross
    sub = aset.subset(cross)
    eps = 1.0 / (8.0 * max(rho0, 1.0 + 1e-9))
    if aset.weights is None:
        approx = sample_epsilon_approximation(sub, min(eps, 0.5), rng)
    else:
        # weighted: the net below samples proportionally to weight directly
        approx = sub.subset(np.arange(len(sub)))
    base = max(4, int(math.ceil(2.0 * rho0 * math.log2(2.0 + rho0))))
    for attempt in range(max_retries):
        size = min(len(approx), int(math.ceil(base * 1.4 ** attempt)))
        net = sample_epsilon_net_sparse(approx, node.trap, eps, rng, size=size)
        net_global = cross[approx.src[net.src]] if approx.src is not None else cross[net.src]
        try:
            cells = vertical_decomposition(aset, node.trap, net_global)
        except DegeneracyError:
            counters["retries"] += 1
            continue
        kids = []
        ok = True
        for cell in cells:
            codes = classify_arcs_np(aset.cx[cross], aset.cy[cross], aset.sign,
                                     aset.x_lo[cross], aset.x_hi[cross], cell)
            counters["ops"] += len(cross)
            kcross = cross[codes == 0]
            if _weight_of(aset, kcross) > bound:
                ok = False
                break
            kids.append(CutNode(cell, node.level + 1, -1,
                                cross=kcross,
                                inside=cross[codes == 1],
                                outside=cross[codes == 2]))
        if ok:
            return kids
        counters["retries"] += 1
    raise CuttingError(
        f"cell refinement failed after {max_retries} retries (degenerate input?)")


def hierarchical_cutting(aset: ArcSet, r: float, rng=None, rho: int = 2,
                         max_retries: int = 64,
                         op_budget: Optional[int] = None) -> HierarchicalCutting:
    """Build the hierarchical (1/r)-cutting with per-cell crossing lists.

    When r > n/8 the chain is built to r' = n/8 and finished with one full
    vertical decomposition per leaf, after which no arc crosses any leaf.
    Weighted sets (aset.weights) get the weighted bound W/rho^i per level.
    """
    if rng is None or isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(0 if rng is None else int(rng))
    n = len(aset)
    total = aset.total_weight()
    if n > 0 and not 1 <= r:
        raise GeometryError("need r >= 1")
    finishing = n > 0 and r > n / 8
    r_chain = min(r, n / 8 if n >= 8 else 1)

    root_codes = classify_arcs_np(aset.cx, aset.cy, aset.sign, aset.x_lo, aset.x_hi, aset.root)
    root = CutNode(aset.root, 0, -1, cross=np.nonzero(root_codes == 0)[0].astype(np.int64))
    cut = HierarchicalCutting(aset, rho, r, [root], [[0]])
    counters = {"ops": n, "retries": 0}

    k = int(math.ceil(math.log(r_chain, rho))) if r_chain > 1 else 0
    for level in range(1, k + 1):
        bound = total / rho ** level
        new_ids = []
        for nid in cut.levels[-1]:
            node = cut.nodes[nid]
            load = _weight_of(aset, node.cross)
            if load <= bound:
                kids = [CutNode(node.trap, level, nid, cross=node.cross)]
            else:
                rho0 = (rho ** level / total) * load
                kids = _refine_cell(aset, node, bound, rho0, rng, max_retries, counters)
            for kid in kids:
                kid.parent = nid
                kid_id = len(cut.nodes)
                cut.nodes.append(kid)
                node.children.append(kid_id)
                new_ids.append(kid_id)
            cut.c_max = max(cut.c_max, len(kids))
            if op_budget is not None and counters["ops"] > op_budget:
                raise BudgetExceeded(f"cutting ops {counters['ops']} > {op_budget}")
        cut.levels.append(new_ids)

    if finishing:
        level = len(cut.levels)
        new_ids = []
        for nid in cut.levels[-1]:
            node = cut.nodes[nid]
            if len(node.cross) == 0:
                kids = [CutNode(node.trap, level, nid, cross=node.cross)]
            else:
                cells = vertical_decomposition(aset, node.trap, node.cross)
                kids = []
                for cell in cells:
                    codes = classify_arcs_np(aset.cx[node.cross], aset.cy[node.cross],
                                             aset.sign, aset.x_lo[node.cross],
                                             aset.x_hi[node.cross], cell)
                    counters["ops"] += len(node.cross)
                    kids.append(CutNode(cell, level, nid,
                                        cross=node.cross[codes == 0],
                                        inside=node.cross[codes == 1],
                                        outside=node.cross[codes == 2]))
            for kid in kids:
                kid.parent = nid
                kid_id = len(cut.nodes)
                cut.nodes.append(kid)
                node.children.append(kid_id)
                new_ids.append(kid_id)
            cut.c_max = max(cut.c_max, len(kids))
        cut.levels.append(new_ids)
        if op_budget is not None and counters["ops"] > op_budget:
            raise BudgetExceeded(f"cutting ops {counters['ops']} > {op_budget}")

    cut.ops = counters["ops"]
    cut.retries = counters["retries"]
    return cut


def weighted_hierarchical_cutting(aset: ArcSet, r: float, rng=None, rho: int = 2,
                                  max_retries: int = 64) -> HierarchicalCutting:
    """Weighted variant: per-level cell bound w(H_sigma) <= W/rho^i.

    The net is sampled proportionally to weight and the weighted bound is
    validated with retry, substituting for the multiplicity method.
    """
    if aset.weights is None:
        raise GeometryError("weighted cutting needs weights")
    if aset.total_weight() <= 0 and len(aset):
        raise GeometryError("total weight must be positive")
    return hierarchical_cutting(aset, r, rng=rng, rho=rho, max_retries=max_retries)
