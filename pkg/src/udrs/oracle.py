"""Brute-force reference implementations.

These are the independent checks for everything else in the package.  They
depend only on the shared point/disk conventions in geometry (closed disks,
squared-distance predicate) and must never route through the index
structures they are used to validate.
"""

from __future__ import annotations

import numpy as np


def brute_count(P: np.ndarray, q, radius: float, mode: str = "inside") -> int:
    """Count points of P inside (or outside) the closed disk at q."""
    if len(P) == 0:
        return 0
    qx, qy = float(q[0]), float(q[1])
    d2 = (P[:, 0] - qx) ** 2 + (P[:, 1] - qy) ** 2
    inside = int(np.count_nonzero(d2 <= radius * radius))
    if mode == "inside":
        return inside
    if mode == "outside":
        return len(P) - inside
    raise ValueError(f"bad mode {mode!r}")


def brute_batched(P: np.ndarray, Q: np.ndarray, radius: float) -> np.ndarray:
    """O(nm) counts of P inside each closed disk centered at Q."""
    m = len(Q)
    counts = np.zeros(m, dtype=np.int64)
    if m == 0 or len(P) == 0:
        return counts
    r2 = radius * radius
    # chunked so the (m, n) distance matrix stays small
    chunk = max(1, int(4e6) // max(1, len(P)))
    for s in range(0, m, chunk):
        e = min(m, s + chunk)
        dx = Q[s:e, 0][:, None] - P[None, :, 0]
        dy = Q[s:e, 1][:, None] - P[None, :, 1]
        counts[s:e] = np.count_nonzero(dx * dx + dy * dy <= r2, axis=1)
    return counts


def all_pair_dist_sq(P: np.ndarray) -> np.ndarray:
    """Squared distances of all unordered pairs, unsorted."""
    n = len(P)
    if n < 2:
        return np.zeros(0)
    dx = P[:, 0][:, None] - P[None, :, 0]
    dy = P[:, 1][:, None] - P[None, :, 1]
    d2 = dx * dx + dy * dy
    iu = np.triu_indices(n, k=1)
    return d2[iu]


def brute_kth_distance(P: np.ndarray, k: int) -> float:
    """k-th smallest pairwise distance (1-based), by sorting all pairs.

    Sorts squared distances and takes the square root at the end, the same
    final-step convention select_distance uses.
    """
    d2 = all_pair_dist_sq(P)
    if not 1 <= k <= len(d2):
        raise ValueError(f"k={k} out of range for {len(P)} points")
    return float(np.sqrt(np.sort(d2)[k - 1]))


def brute_pairs_within(P: np.ndarray, lam: float) -> int:
    """Number of unordered pairs at distance <= lam (closed)."""
    if lam < 0:
        raise ValueError("negative distance bound")
    d2 = all_pair_dist_sq(P)
    return int(np.count_nonzero(d2 <= lam * lam))


def brute_circle_pairs(centers: np.ndarray, r_c: float) -> int:
    """Pairs of radius-r_c circles that intersect (tangent counts)."""
    return brute_pairs_within(centers, 2.0 * r_c)
