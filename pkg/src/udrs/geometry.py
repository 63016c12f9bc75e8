"""Planar primitives for congruent-disk geometry.

Everything downstream runs in rescaled coordinates where all disks have
radius exactly 1.  Disks are closed: boundary points count as inside.
Inputs are assumed to be in general position with margin (no point sits
closer than ~1e-9 to a circle it is tested against); these primitives do
not attempt exact arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

# Grid cell side length: 1/sqrt(2), so a cell's diagonal equals the disk radius.
SIDE = math.sqrt(0.5)
# Distance from the midpoint of a cell edge to the center of the unit disk
# through both edge endpoints: sqrt(1 - (SIDE/2)^2).
_EDGE_DROP = math.sqrt(7.0 / 8.0)

ON_EPS = 1e-12
_HALF_EPS = 1e-12
# Crossing intervals narrower than this are treated as boundary grazes, not
# interior crossings.  Cell corners sit exactly on arcs by construction (walls
# are dropped from intersection points), so recomputed roots land within an
# ulp of the wall; the margin contract keeps real crossings far wider.
X_EPS = 1e-11


class GeometryError(ValueError):
    """Invalid geometric input."""


class DegeneracyError(GeometryError):
    """Input violates the general-position contract."""


def _require_finite(*vals: float) -> None:
    for v in vals:
        if not math.isfinite(v):
            raise GeometryError(f"non-finite coordinate: {v!r}")


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self) -> None:
        _require_finite(self.x, self.y)


def validate_radius(r: float) -> float:
    """Check the single global query radius: finite and > 0."""
    if not (math.isfinite(r) and r > 0.0):
        raise GeometryError(f"radius must be finite and positive, got {r!r}")
    return float(r)


def dist_sq(ax: float, ay: float, bx: float, by: float) -> float:
    return (ax - bx) ** 2 + (ay - by) ** 2


def point_in_disk(p: Point, c: Point) -> bool:
    """Closed unit-disk membership (rescaled coordinates)."""
    return dist_sq(p.x, p.y, c.x, c.y) <= 1.0


def point_in_disk_r(px: float, py: float, cx: float, cy: float, radius: float) -> bool:
    """Closed disk membership at an explicit radius.

    This exact expression (squared distance vs radius*radius) is the one
    convention shared by the index structures and the brute-force oracles.
    """
    return (px - cx) ** 2 + (py - cy) ** 2 <= radius * radius


def _sign(kind: str) -> float:
    if kind == "upper":
        return 1.0
    if kind == "lower":
        return -1.0
    raise GeometryError(f"bad arc kind {kind!r}")


@dataclass(frozen=True)
class Arc:
    """x-monotone half of a unit circle, clipped to [x_lo, x_hi].

    kind "upper" is the half with y >= center.y; "lower" the other.
    """

    center: Point
    kind: str
    x_lo: float
    x_hi: float

    def __post_init__(self) -> None:
        _sign(self.kind)
        _require_finite(self.x_lo, self.x_hi)
        if self.x_lo > self.x_hi:
            raise GeometryError("arc has x_lo > x_hi")
        if self.x_lo < self.center.x - 1.0 - 1e-9 or self.x_hi > self.center.x + 1.0 + 1e-9:
            raise GeometryError("arc span leaves the unit circle's x-range")

    @property
    def sign(self) -> float:
        return _sign(self.kind)

    def y_at(self, x: float) -> float:
        dx = x - self.center.x
        return self.center.y + self.sign * math.sqrt(max(0.0, 1.0 - dx * dx))


@dataclass(frozen=True)
class HorizSegment:
    y: float


@dataclass(frozen=True)
class UnitArc:
    center: Point
    kind: str


Boundary = Union[HorizSegment, UnitArc]

# Curves are the flat form of Boundary used by the numeric kernels:
# ("h", y) or ("a", cx, cy, sign).
Curve = tuple


def boundary_curve(b: Boundary) -> Curve:
    if isinstance(b, HorizSegment):
        return ("h", b.y)
    return ("a", b.center.x, b.center.y, _sign(b.kind))


def curve_boundary(c: Curve) -> Boundary:
    if c[0] == "h":
        return HorizSegment(c[1])
    return UnitArc(Point(c[1], c[2]), "upper" if c[3] > 0 else "lower")


def curve_y(c: Curve, x: float) -> float:
    if c[0] == "h":
        return c[1]
    dx = x - c[1]
    return c[2] + c[3] * math.sqrt(max(0.0, 1.0 - dx * dx))


def curve_y_np(c: Curve, xs: np.ndarray) -> np.ndarray:
    if c[0] == "h":
        return np.full(np.shape(xs), c[1])
    dx = xs - c[1]
    return c[2] + c[3] * np.sqrt(np.maximum(0.0, 1.0 - dx * dx))


@dataclass(frozen=True)
class PseudoTrapezoid:
    """Region between two vertical lines and two non-crossing boundaries.

    For every x in [x_lo, x_hi] the top boundary evaluates >= the bottom one.
    """

    x_lo: float
    x_hi: float
    top: Boundary
    bottom: Boundary

    def __post_init__(self) -> None:
        _require_finite(self.x_lo, self.x_hi)
        if self.x_lo > self.x_hi:
            raise GeometryError("pseudo-trapezoid has x_lo > x_hi")

    def top_y(self, x: float) -> float:
        return curve_y(boundary_curve(self.top), x)

    def bottom_y(self, x: float) -> float:
        return curve_y(boundary_curve(self.bottom), x)

    def contains(self, x: float, y: float) -> bool:
        if x < self.x_lo or x > self.x_hi:
            return False
        return self.bottom_y(x) <= y <= self.top_y(x)

    def strictly_inside(self, x: float, y: float) -> bool:
        if not (self.x_lo < x < self.x_hi):
            return False
        return self.bottom_y(x) < y < self.top_y(x)

    def midpoint(self) -> tuple[float, float]:
        x = 0.5 * (self.x_lo + self.x_hi)
        return x, 0.5 * (self.top_y(x) + self.bottom_y(x))

    def corners(self) -> list[Point]:
        out = []
        for x in (self.x_lo, self.x_hi):
            for y in (self.bottom_y(x), self.top_y(x)):
                out.append(Point(x, y))
        return out

    def contains_np(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        tc = boundary_curve(self.top)
        bc = boundary_curve(self.bottom)
        m = (xs >= self.x_lo) & (xs <= self.x_hi)
        m &= ys >= curve_y_np(bc, xs)
        m &= ys <= curve_y_np(tc, xs)
        return m


def circle_circle_points(ax: float, ay: float, bx: float, by: float) -> list[tuple[float, float]]:
    """Intersection points of two unit circles with distinct centers.

    Equal-radius circles meet on the perpendicular bisector of their centers,
    which is what keeps every downstream arc pairing at most single-crossing.
    """
    dx = bx - ax
    dy = by - ay
    d2 = dx * dx + dy * dy
    if d2 == 0.0:
        raise DegeneracyError("coincident circle centers")
    if d2 > 4.0:
        return []
    d = math.sqrt(d2)
    mx = 0.5 * (ax + bx)
    my = 0.5 * (ay + by)
    h = math.sqrt(max(0.0, 1.0 - 0.25 * d2))
    ox = -dy / d * h
    oy = dx / d * h
    if h == 0.0:
        return [(mx, my)]
    return [(mx + ox, my + oy), (mx - ox, my - oy)]


def _roots_vs_curve(curve: Curve, cx: float, cy: float, sgn: float) -> list[float]:
    """x-coordinates where the (full-span) unit half-circle meets the curve."""
    if curve[0] == "h":
        t = curve[1] - cy
        if sgn * t < 0.0:
            return []
        q = 1.0 - t * t
        if q < 0.0:
            return []
        s = math.sqrt(q)
        return [cx - s, cx + s] if s > 0.0 else [cx]
    bx, by, bs = curve[1], curve[2], curve[3]
    if bx == cx and by == cy:
        return []  # same circle: curves coincide or occupy opposite halves
    out = []
    for px, py in circle_circle_points(cx, cy, bx, by):
        if sgn * (py - cy) >= -_HALF_EPS and bs * (py - by) >= -_HALF_EPS:
            out.append(px)
    return out


def _roots_vs_curve_np(curve: Curve, cx: np.ndarray, cy: np.ndarray, sgn: float):
    """Vectorized _roots_vs_curve: two x-root arrays, NaN where absent."""
    nan = np.nan
    if curve[0] == "h":
        t = curve[1] - cy
        q = 1.0 - t * t
        ok = (sgn * t >= 0.0) & (q >= 0.0)
        s = np.sqrt(np.where(ok, q, 0.0))
        r1 = np.where(ok, cx - s, nan)
        r2 = np.where(ok, cx + s, nan)
        return r1, r2
    bx, by, bs = curve[1], curve[2], curve[3]
    dx = bx - cx
    dy = by - cy
    d2 = dx * dx + dy * dy
    ok = (d2 > 0.0) & (d2 <= 4.0)
    d = np.sqrt(np.where(ok, d2, 1.0))
    h = np.sqrt(np.maximum(0.0, 1.0 - 0.25 * d2))
    mx = cx + 0.5 * dx
    my = cy + 0.5 * dy
    ox = -dy / d * h
    oy = dx / d * h
    outs = []
    for s in (1.0, -1.0):
        px = mx + s * ox
        py = my + s * oy
        keep = ok & (sgn * (py - cy) >= -_HALF_EPS) & (bs * (py - by) >= -_HALF_EPS)
        outs.append(np.where(keep, px, nan))
    return outs[0], outs[1]


def arc_crosses_trap_interior(a: Arc, t: PseudoTrapezoid) -> bool:
    """Does the arc meet the open interior of the trapezoid?"""
    codes = classify_arcs_np(
        np.array([a.center.x]),
        np.array([a.center.y]),
        a.sign,
        np.array([a.x_lo]),
        np.array([a.x_hi]),
        t,
    )
    return bool(codes[0] == 0)


# classify codes used by the vectorized kernel
CROSSES = 0
DISK_CONTAINS = 1
DISK_DISJOINT = 2


def classify_arcs_np(
    cx: np.ndarray,
    cy: np.ndarray,
    sgn: float,
    lo: np.ndarray,
    hi: np.ndarray,
    t: PseudoTrapezoid,
) -> np.ndarray:
    """Classify many same-kind arcs against one trapezoid.

    Returns codes: 0 the arc crosses the interior, 1 the underlying closed
    disk contains the trapezoid, 2 the disk misses it.  Callers inside a cell
    pair frame are guaranteed one of these three outcomes; the general
    off-span straddle case is only distinguished by classify_arc_vs_trapezoid.

    Sign changes of arc-minus-boundary happen only at curve crossings, and
    each boundary contributes at most two, so testing the midpoint of every
    root-delimited subinterval is exhaustive.
    """
    tc = boundary_curve(t.top)
    bc = boundary_curve(t.bottom)
    s_lo = np.maximum(lo, t.x_lo)
    s_hi = np.minimum(hi, t.x_hi)
    valid = s_lo <= s_hi

    r1, r2 = _roots_vs_curve_np(tc, cx, cy, sgn)
    r3, r4 = _roots_vs_curve_np(bc, cx, cy, sgn)
    cols = [s_lo]
    for r in (r1, r2, r3, r4):
        cols.append(np.where((r >= s_lo) & (r <= s_hi), r, np.nan))
    cols.append(s_hi)
    xs = np.sort(np.stack(cols, axis=1), axis=1)  # NaNs sort to the end

    crosses = np.zeros(cx.shape, dtype=bool)
    for j in range(xs.shape[1] - 1):
        m = 0.5 * (xs[:, j] + xs[:, j + 1])
        good = np.isfinite(m) & (m > t.x_lo) & (m < t.x_hi)
        if not good.any():
            continue
        dx = m - cx
        ya = cy + sgn * np.sqrt(np.maximum(0.0, 1.0 - dx * dx))
        inside = good & (ya > curve_y_np(bc, m)) & (ya < curve_y_np(tc, m))
        crosses |= inside
    crosses &= valid

    mx, my = t.midpoint()
    din = (mx - cx) ** 2 + (my - cy) ** 2 <= 1.0
    return np.where(crosses, CROSSES, np.where(din, DISK_CONTAINS, DISK_DISJOINT)).astype(np.int8)


class ArcTrapRelation(Enum):
    CROSSES = "crosses"
    DISK_CONTAINS_CELL = "disk_contains_cell"
    DISK_DISJOINT_FROM_CELL = "disk_disjoint_from_cell"
    CELL_OUTSIDE_SPAN_ABOVE = "cell_outside_span_above"
    CELL_OUTSIDE_SPAN_BELOW = "cell_outside_span_below"


def classify_arc_vs_trapezoid(a: Arc, t: PseudoTrapezoid) -> ArcTrapRelation:
    """Relation of an arc (and its underlying closed disk) to a trapezoid.

    CROSSES iff the clipped arc meets the interior of t.  Otherwise, if the
    full circle stays out of t's interior, the connected trapezoid lies on
    one closed side of the disk and that side is reported.  The remaining
    case (circle enters t only outside the arc's span) is reported relative
    to the arc's center height; it cannot arise for spanning arcs inside an
    enlarged cell.
    """
    if arc_crosses_trap_interior(a, t):
        return ArcTrapRelation.CROSSES
    mx, my = t.midpoint()
    full = Arc(a.center, a.kind, a.center.x - 1.0, a.center.x + 1.0)
    other = Arc(a.center, "lower" if a.kind == "upper" else "upper",
                a.center.x - 1.0, a.center.x + 1.0)
    circle_crosses = arc_crosses_trap_interior(full, t) or arc_crosses_trap_interior(other, t)
    if not circle_crosses:
        if dist_sq(mx, my, a.center.x, a.center.y) <= 1.0:
            return ArcTrapRelation.DISK_CONTAINS_CELL
        return ArcTrapRelation.DISK_DISJOINT_FROM_CELL
    if my >= a.center.y:
        return ArcTrapRelation.CELL_OUTSIDE_SPAN_ABOVE
    return ArcTrapRelation.CELL_OUTSIDE_SPAN_BELOW


class PointArcRelation(Enum):
    BELOW = "below"
    ON = "on"
    ABOVE = "above"
    OUTSIDE_SPAN = "outside_span"


def point_vs_arc(p: Point, a: Arc) -> PointArcRelation:
    """Vertical position of p against the arc at p.x.

    For an upper arc, BELOW (or ON) within the span means p lies in the
    closed underlying disk; for a lower arc the disk side is ABOVE/ON.
    """
    if p.x < a.x_lo or p.x > a.x_hi:
        return PointArcRelation.OUTSIDE_SPAN
    dy = p.y - a.y_at(p.x)
    if abs(dy) <= ON_EPS:
        return PointArcRelation.ON
    return PointArcRelation.BELOW if dy < 0.0 else PointArcRelation.ABOVE


def arcs_intersect(a: Arc, b: Arc) -> Optional[Point]:
    """Unique intersection of two same-kind arcs, or None.

    Same-kind arcs of congruent circles cross at most once: both circle
    intersection points lie on the perpendicular bisector of the centers and
    their half-memberships cannot both hold twice.
    """
    if a.kind != b.kind:
        raise GeometryError("arcs_intersect requires same-kind arcs")
    if a.center == b.center:
        if min(a.x_hi, b.x_hi) > max(a.x_lo, b.x_lo):
            raise DegeneracyError("identical arcs with overlapping spans")
        return None
    lo = max(a.x_lo, b.x_lo)
    hi = min(a.x_hi, b.x_hi)
    if lo > hi:
        return None
    hits = []
    for px, py in circle_circle_points(a.center.x, a.center.y, b.center.x, b.center.y):
        if a.sign * (py - a.center.y) < -_HALF_EPS:
            continue
        if b.sign * (py - b.center.y) < -_HALF_EPS:
            continue
        if lo <= px <= hi:
            hits.append((px, py))
    if not hits:
        return None
    if len(hits) > 1 and dist_sq(hits[0][0], hits[0][1], hits[1][0], hits[1][1]) > 1e-20:
        raise DegeneracyError("same-kind arcs with two intersections")
    return Point(hits[0][0], hits[0][1])


def clip_half_to_trap(
    cx: float,
    cy: float,
    kind: str,
    t: PseudoTrapezoid,
    x_lo: Optional[float] = None,
    x_hi: Optional[float] = None,
) -> Optional[tuple[float, float]]:
    """x-interval where the half-circle of (cx, cy) lies inside closed t.

    The intersection of a unit half-circle with a same-kind pseudo-trapezoid
    is a single x-interval (concavity against horizontal boundaries, single
    crossing against congruent-arc boundaries); a multi-interval result is a
    degeneracy and raises.
    """
    sgn = _sign(kind)
    lo = max(t.x_lo, cx - 1.0, x_lo if x_lo is not None else -math.inf)
    hi = min(t.x_hi, cx + 1.0, x_hi if x_hi is not None else math.inf)
    if lo > hi:
        return None
    tc = boundary_curve(t.top)
    bc = boundary_curve(t.bottom)
    xs = {lo, hi}
    for curve in (tc, bc):
        for r in _roots_vs_curve(curve, cx, cy, sgn):
            if lo < r < hi:
                xs.add(r)
    xs = sorted(xs)
    runs = []
    for x0, x1 in zip(xs[:-1], xs[1:]):
        m = 0.5 * (x0 + x1)
        dxm = m - cx
        ym = cy + sgn * math.sqrt(max(0.0, 1.0 - dxm * dxm))
        if curve_y(bc, m) <= ym <= curve_y(tc, m):
            if runs and runs[-1][1] == x0:
                runs[-1][1] = x1
            else:
                runs.append([x0, x1])
    if len(xs) == 1:
        y0 = cy + sgn * math.sqrt(max(0.0, 1.0 - (lo - cx) ** 2))
        if curve_y(bc, lo) <= y0 <= curve_y(tc, lo):
            runs.append([lo, lo])
    runs = [r for r in runs if r[1] - r[0] > 1e-12]
    if not runs:
        return None
    if len(runs) > 1:
        raise DegeneracyError("half-circle meets trapezoid in several components")
    return runs[0][0], runs[0][1]


@dataclass(frozen=True)
class Square:
    """Axis-aligned square, lower-left corner plus side."""

    x0: float
    y0: float
    side: float

    @property
    def x1(self) -> float:
        return self.x0 + self.side

    @property
    def y1(self) -> float:
        return self.y0 + self.side

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1


def rotate_xy(x, y, quarter_turns: int):
    """Rotate by quarter_turns * 90 degrees CCW about the origin (exact)."""
    q = quarter_turns % 4
    if q == 0:
        return x, y
    if q == 1:
        return -y, x
    if q == 2:
        return -x, -y
    return y, -x


def _rotate_square(sq: Square, q: int) -> Square:
    xs, ys = zip(*[rotate_xy(x, y, q) for x, y in
                   ((sq.x0, sq.y0), (sq.x1, sq.y0), (sq.x0, sq.y1), (sq.x1, sq.y1))])
    return Square(min(xs), min(ys), sq.side)


def enlarged_point_cell(cp: Square) -> PseudoTrapezoid:
    """The point cell with its top edge replaced by the bulging upper arc."""
    cxa = cp.x0 + 0.5 * cp.side
    center = Point(cxa, cp.y1 - _EDGE_DROP)
    return PseudoTrapezoid(cp.x0, cp.x1, UnitArc(center, "upper"), HorizSegment(cp.y0))


def enlarged_center_cell(c: Square) -> PseudoTrapezoid:
    """The query-center cell with its bottom edge replaced by the lower arc."""
    cxa = c.x0 + 0.5 * c.side
    center = Point(cxa, c.y0 + _EDGE_DROP)
    return PseudoTrapezoid(c.x0, c.x1, HorizSegment(c.y1), UnitArc(center, "lower"))


@dataclass(frozen=True)
class CellPairFrame:
    """A (query cell, point cell) pair in canonical orientation.

    Canonical means the query cell C lies below a horizontal line and the
    point cell C' above it; `rot` is the number of quarter turns that maps
    the world plane onto this orientation.
    """

    cell_C: Square
    cell_Cp: Square
    enlarged_Cp: PseudoTrapezoid
    enlarged_C: PseudoTrapezoid
    rot: int

    def to_canonical(self, pts: np.ndarray) -> np.ndarray:
        xs, ys = rotate_xy(pts[..., 0], pts[..., 1], self.rot)
        return np.stack([xs, ys], axis=-1)

    def to_canonical_point(self, p: Point) -> Point:
        x, y = rotate_xy(p.x, p.y, self.rot)
        return Point(x, y)


def make_frame(cell_C: Square, cell_Cp: Square) -> CellPairFrame:
    """Build the canonical frame for a separated cell pair."""
    if abs(cell_C.side - cell_Cp.side) > 1e-12:
        raise GeometryError("cell pair sides differ")
    tol = 1e-9
    if cell_Cp.y0 >= cell_C.y1 - tol:
        rot = 0
    elif cell_C.y0 >= cell_Cp.y1 - tol:
        rot = 2
    elif cell_Cp.x0 >= cell_C.x1 - tol:
        rot = 1
    elif cell_C.x0 >= cell_Cp.x1 - tol:
        rot = 3
    else:
        raise GeometryError("cells are not separated by an axis-parallel line")
    c = _rotate_square(cell_C, rot)
    cp = _rotate_square(cell_Cp, rot)
    if cp.y0 < c.y1 - tol:
        raise GeometryError("cells are not separated after rotation")
    return CellPairFrame(c, cp, enlarged_point_cell(cp), enlarged_center_cell(c), rot)


def clip_disk_boundary(c: Point, frame: CellPairFrame, kind: str = "upper") -> Optional[Arc]:
    """The single arc of the unit circle about c inside an enlarged cell.

    kind "upper": c must lie in the query cell, the clip runs in the enlarged
    point cell.  kind "lower": the symmetric dual clip for a point in the
    point cell against the enlarged query cell.  Returns None when the
    boundary misses the region entirely.
    """
    if kind == "upper":
        if not frame.cell_C.contains(c.x, c.y):
            raise GeometryError("disk center outside the frame's query cell")
        trap = frame.enlarged_Cp
    else:
        if not frame.cell_Cp.contains(c.x, c.y):
            raise GeometryError("dual point outside the frame's point cell")
        trap = frame.enlarged_C
    span = clip_half_to_trap(c.x, c.y, kind, trap)
    if span is None:
        return None
    return Arc(c, kind, span[0], span[1])


def clip_center_to_region(cx: float, cy: float, kind: str, trap: PseudoTrapezoid) -> Optional[Arc]:
    """clip_disk_boundary against an explicit trapezoid (no cell check)."""
    span = clip_half_to_trap(cx, cy, kind, trap)
    if span is None:
        return None
    return Arc(Point(cx, cy), kind, span[0], span[1])
