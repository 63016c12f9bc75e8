"""Global grid reduction: side-1/sqrt(2) cells, neighbor sets, O(log n) location.

The plane is swept into vertical strips (gap threshold 3, padding 1 plus an
alignment slack so widths are exact multiples of the cell side), each strip
into rectangles by the same sweep on y, and each rectangle into a grid of
square cells.  A query disk centered outside every stored cell contains no
input point; one centered inside cell C only reaches points in the cells of
N(C), the non-empty cells within the surrounding 5x5 index block.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .geometry import SIDE, GeometryError, Square

# Cells at index offset (dr, dc) with max(|dr|, |dc|) <= 2 are exactly those
# at geometric distance <= 1 from C (corner blocks sit at distance exactly 1,
# included by the closed-disk convention).
NEIGHBOR_REACH = 2
MAX_NEIGHBORS = (2 * NEIGHBOR_REACH + 1) ** 2

GAP_THRESHOLD = 3.0
PADDING = 1.0

CellKey = tuple[int, int, int, int]  # (strip, rect, row, col)


@dataclass
class RectRec:
    y_lo: float
    y_hi: float
    nrows: int
    nonempty: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    cells: list[tuple[int, int]] = field(default_factory=list)  # sorted C_R
    neighbors: dict[tuple[int, int], list[tuple[int, int]]] = field(default_factory=dict)


@dataclass
class StripRec:
    x_lo: float
    x_hi: float
    ncols: int
    rects: list[RectRec] = field(default_factory=list)
    rect_lows: list[float] = field(default_factory=list)


@dataclass
class GridIndex:
    points: np.ndarray
    strips: list[StripRec]
    strip_lows: list[float]
    rescale: float = 1.0

    @property
    def n(self) -> int:
        return len(self.points)

    def all_cells(self):
        for si, strip in enumerate(self.strips):
            for ri, rect in enumerate(strip.rects):
                for rc in rect.cells:
                    yield (si, ri, rc[0], rc[1])

    def cell_square(self, key: CellKey) -> Square:
        si, ri, row, col = key
        strip = self.strips[si]
        rect = strip.rects[ri]
        return Square(strip.x_lo + col * SIDE, rect.y_lo + row * SIDE, SIDE)

    def points_in(self, key: CellKey) -> np.ndarray:
        si, ri, row, col = key
        return self.strips[si].rects[ri].nonempty.get((row, col), np.zeros(0, dtype=np.int64))

    def neighbors(self, key: CellKey) -> list[CellKey]:
        si, ri, row, col = key
        rect = self.strips[si].rects[ri]
        return [(si, ri, r, c) for (r, c) in rect.neighbors.get((row, col), [])]


def _sweep_1d(vals: np.ndarray) -> list[tuple[float, float, int, np.ndarray]]:
    """Sweep sorted values into padded, side-aligned intervals.

    Returns (lo, hi, ncells, member index array) per interval, where
    hi - lo is an exact multiple of SIDE and members are the positions of
    the interval's values in the input order.
    """
    order = np.argsort(vals, kind="stable")
    sv = vals[order]
    out = []
    start = 0
    for i in range(len(sv)):
        if i + 1 < len(sv) and sv[i + 1] - sv[i] <= GAP_THRESHOLD:
            continue
        lo = sv[start] - PADDING
        ncells = max(1, math.ceil((sv[i] + PADDING - lo) / SIDE))
        while lo + ncells * SIDE < sv[i] + PADDING:
            ncells += 1
        out.append((lo, lo + ncells * SIDE, ncells, order[start:i + 1]))
        start = i + 1
    return out


def _cell_index(v: float, lo: float, ncells: int) -> int:
    # half-open cells, last one closed
    i = int(math.floor((v - lo) / SIDE))
    return min(max(i, 0), ncells - 1)


def build_grid(P: np.ndarray, rescale: float = 1.0) -> GridIndex:
    """Build the cell set, per-cell point lists and neighbor sets."""
    P = np.asarray(P, dtype=np.float64).reshape(-1, 2)
    if len(P) and not np.isfinite(P).all():
        raise GeometryError("non-finite point coordinates")
    g = GridIndex(points=P, strips=[], strip_lows=[], rescale=rescale)
    if len(P) == 0:
        return g
    for x_lo, x_hi, ncols, sidx in _sweep_1d(P[:, 0]):
        strip = StripRec(x_lo, x_hi, ncols)
        ys = P[sidx, 1]
        for y_lo, y_hi, nrows, ridx_local in _sweep_1d(ys):
            rect = RectRec(y_lo, y_hi, nrows)
            members = sidx[ridx_local]
            rows = np.clip(np.floor((P[members, 1] - y_lo) / SIDE).astype(np.int64), 0, nrows - 1)
            cols = np.clip(np.floor((P[members, 0] - x_lo) / SIDE).astype(np.int64), 0, ncols - 1)
            for r, c, pi in zip(rows, cols, members):
                rect.nonempty.setdefault((int(r), int(c)), []).append(int(pi))
            for rc in rect.nonempty:
                rect.nonempty[rc] = np.array(sorted(rect.nonempty[rc]), dtype=np.int64)
            cell_set = set()
            for (r, c) in rect.nonempty:
                for dr in range(-NEIGHBOR_REACH, NEIGHBOR_REACH + 1):
                    for dc in range(-NEIGHBOR_REACH, NEIGHBOR_REACH + 1):
                        rr, cc = r + dr, c + dc
                        if 0 <= rr < nrows and 0 <= cc < ncols:
                            cell_set.add((rr, cc))
            rect.cells = sorted(cell_set)
            for rc in rect.cells:
                r, c = rc
                nb = [
                    (rr, cc)
                    for (rr, cc) in rect.nonempty
                    if abs(rr - r) <= NEIGHBOR_REACH and abs(cc - c) <= NEIGHBOR_REACH
                ]
                rect.neighbors[rc] = sorted(nb)
            strip.rects.append(rect)
        strip.rects.sort(key=lambda rr: rr.y_lo)
        strip.rect_lows = [rr.y_lo for rr in strip.rects]
        g.strips.append(strip)
    g.strips.sort(key=lambda s: s.x_lo)
    g.strip_lows = [s.x_lo for s in g.strips]
    return g


def locate(g: GridIndex, q) -> tuple[CellKey, list[CellKey]] | None:
    """Find the stored cell containing q and its neighbor set.

    None means no stored cell contains q, in which case the unit disk about
    q contains no input point.
    """
    qx, qy = float(q[0]), float(q[1])
    si = bisect_right(g.strip_lows, qx) - 1
    if si < 0:
        return None
    strip = g.strips[si]
    if qx > strip.x_hi:
        return None
    ri = bisect_right(strip.rect_lows, qy) - 1
    if ri < 0:
        return None
    rect = strip.rects[ri]
    if qy > rect.y_hi:
        return None
    row = _cell_index(qy, rect.y_lo, rect.nrows)
    col = _cell_index(qx, strip.x_lo, strip.ncols)
    if (row, col) not in rect.neighbors:
        return None
    key = (si, ri, row, col)
    return key, g.neighbors(key)
