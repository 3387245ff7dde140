"""Non-dominated sorting, longest-chain depths, and within-front traversal.

Points are `(n, T)` float arrays; smaller is better in every coordinate.
A point strictly dominates another when it is <= componentwise and < in at
least one coordinate.  Sorting a point set into successive fronts of
mutually non-dominated points assigns each point a depth (1-based front
index); for coordinate-distinct points that depth equals the length of the
longest componentwise-nondecreasing chain ending at the point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ValidationError

__all__ = [
    "ParetoLayering",
    "dominates",
    "non_dominated_sort",
    "longest_chain_depths",
    "depth_at",
    "middle_out_order",
]


def dominates(p, q) -> bool:
    """True iff ``p`` strictly dominates ``q`` (<= everywhere, < somewhere)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionError(f"point dimensions differ: {p.shape} vs {q.shape}")
    return bool(np.all(p <= q) and np.any(p < q))


@dataclass(frozen=True)
class ParetoLayering:
    """Partition of a point set into Pareto fronts.

    Attributes
    ----------
    front_of : (n,) int array
        1-based front index per point.
    fronts : list of int arrays
        ``fronts[k]`` holds the point indices on front ``k+1``, ascending.
    """

    front_of: np.ndarray
    fronts: list[np.ndarray]

    @property
    def n_fronts(self) -> int:
        return len(self.fronts)

    def to_json(self) -> dict:
        return {
            "front_of": self.front_of.tolist(),
            "fronts": [f.tolist() for f in self.fronts],
        }


class _FenwickMax:
    """Fenwick tree over 1..size supporting prefix-max queries."""

    def __init__(self, size: int):
        self.size = size
        self.tree = [0] * (size + 1)

    def update(self, i: int, value: int) -> None:
        while i <= self.size:
            if self.tree[i] < value:
                self.tree[i] = value
            i += i & -i

    def query(self, i: int) -> int:
        best = 0
        while i > 0:
            if self.tree[i] > best:
                best = self.tree[i]
            i -= i & -i
        return best


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValidationError("points must be a nonempty (n, T) array")
    if not np.all(np.isfinite(pts)):
        raise ValidationError("points must be finite")
    return pts


def _sort_2d(points: np.ndarray) -> np.ndarray:
    """Front indices for T=2 via a single sweep with a Fenwick tree.

    Points are processed in (x, y) lexicographic order, grouped by exact
    coordinate pair so duplicates never dominate each other.  A point's
    front is one more than the deepest front among already-processed points
    with y' <= y, all of which dominate it.
    """
    n = len(points)
    x, y = points[:, 0], points[:, 1]
    y_rank = np.searchsorted(np.unique(y), y) + 1  # 1-based
    order = np.lexsort((np.arange(n), y, x))
    fen = _FenwickMax(int(y_rank.max()))
    front_of = np.zeros(n, dtype=np.int64)
    i = 0
    while i < n:
        j = i
        while (
            j + 1 < n
            and x[order[j + 1]] == x[order[i]]
            and y[order[j + 1]] == y[order[i]]
        ):
            j += 1
        rank = int(y_rank[order[i]])
        front = fen.query(rank) + 1
        front_of[order[i : j + 1]] = front
        fen.update(rank, front)
        i = j + 1
    return front_of


def _sort_general(points: np.ndarray) -> np.ndarray:
    """Front indices via the O(n^2 T) pairwise domination-count scheme."""
    n = len(points)
    le = np.all(points[:, None, :] <= points[None, :, :], axis=2)
    lt = np.any(points[:, None, :] < points[None, :, :], axis=2)
    dom = le & lt  # dom[i, j]: i strictly dominates j
    counts = dom.sum(axis=0)
    front_of = np.zeros(n, dtype=np.int64)
    k = 0
    while True:
        current = (counts == 0) & (front_of == 0)
        if not current.any():
            break
        k += 1
        front_of[current] = k
        counts = counts - dom[current].sum(axis=0)
    return front_of


def non_dominated_sort(points) -> ParetoLayering:
    """Partition points into Pareto fronts under strict dominance.

    Uses an O(n log n) sweep for two coordinates and the pairwise
    domination-count algorithm otherwise; both give identical layerings.
    Duplicate points are mutually non-dominating and share a front.
    """
    pts = _as_points(points)
    if pts.shape[1] == 2:
        front_of = _sort_2d(pts)
    else:
        front_of = _sort_general(pts)
    n_fronts = int(front_of.max())
    fronts = [np.flatnonzero(front_of == k) for k in range(1, n_fronts + 1)]
    return ParetoLayering(front_of=front_of, fronts=fronts)


def _chain_depths_1d(x: np.ndarray) -> np.ndarray:
    sorted_x = np.sort(x)
    return np.searchsorted(sorted_x, x, side="right").astype(np.int64)


def _chain_depths_2d(points: np.ndarray) -> np.ndarray:
    """Longest-chain lengths for T=2 via a Fenwick sweep, O(n log n)."""
    n = len(points)
    x, y = points[:, 0], points[:, 1]
    y_rank = np.searchsorted(np.unique(y), y) + 1
    order = np.lexsort((np.arange(n), y, x))
    fen = _FenwickMax(int(y_rank.max()))
    depths = np.zeros(n, dtype=np.int64)
    i = 0
    while i < n:
        j = i
        while (
            j + 1 < n
            and x[order[j + 1]] == x[order[i]]
            and y[order[j + 1]] == y[order[i]]
        ):
            j += 1
        group = j - i + 1
        rank = int(y_rank[order[i]])
        # a chain may pass through every duplicate of the group
        depth = fen.query(rank) + group
        depths[order[i : j + 1]] = depth
        fen.update(rank, depth)
        i = j + 1
    return depths


def _chain_depths_nd(points: np.ndarray) -> np.ndarray:
    """Longest-chain lengths for arbitrary T by DP over unique rows."""
    rows, inverse, counts = np.unique(
        points, axis=0, return_inverse=True, return_counts=True
    )
    m = len(rows)
    udepth = np.zeros(m, dtype=np.int64)
    # unique rows come out lexicographically sorted, so every predecessor
    # under the componentwise order lies in the prefix
    for u in range(m):
        if u == 0:
            udepth[u] = counts[u]
            continue
        mask = np.all(rows[:u] <= rows[u], axis=1)
        best = int(udepth[:u][mask].max()) if mask.any() else 0
        udepth[u] = best + counts[u]
    return udepth[inverse]


def longest_chain_depths(points) -> np.ndarray:
    """Length of the longest nondecreasing chain ending at each point.

    A chain is a sequence of points totally ordered by the componentwise
    partial order.  Coordinate-duplicate points are all chainable with each
    other, so every member of a duplicate group shares the group's full
    chain length.  For coordinate-distinct points the result equals the
    1-based front index from :func:`non_dominated_sort` at every point.
    """
    pts = _as_points(points)
    t = pts.shape[1]
    if t == 1:
        return _chain_depths_1d(pts[:, 0])
    if t == 2:
        return _chain_depths_2d(pts)
    return _chain_depths_nd(pts)


def depth_at(points, x) -> int:
    """Deepest front index with a member componentwise <= ``x``; 0 if none.

    The sentinel 0 encodes an implicit front below all data points.
    """
    pts = _as_points(points)
    x = np.asarray(x, dtype=float)
    if x.shape != (pts.shape[1],):
        raise DimensionError(
            f"query point has dimension {x.shape}, expected ({pts.shape[1]},)"
        )
    mask = np.all(pts <= x, axis=1)
    if not mask.any():
        return 0
    front_of = non_dominated_sort(pts).front_of
    return int(front_of[mask].max())


def middle_out_alternation(length: int) -> np.ndarray:
    """Visit positions 0..length-1 starting at the median, fanning outward.

    Order is floor((length-1)/2), then +1, -1, +2, -2, ...
    """
    if length < 1:
        raise ValidationError("length must be >= 1")
    start = (length - 1) // 2
    visit = [start]
    step = 1
    while len(visit) < length:
        if start + step < length:
            visit.append(start + step)
        if start - step >= 0:
            visit.append(start - step)
        step += 1
    return np.asarray(visit, dtype=np.int64)


def middle_out_order(front, points) -> np.ndarray:
    """Order a front's members from its most balanced point toward the tails.

    For two coordinates the front is sorted by the first coordinate and
    visited median-first, alternating outward.  For other dimensions,
    members are ordered by ascending variance of their min-max-normalized
    coordinates (normalization taken over the whole point set), so the
    point most equidistant from all criteria comes first.  Ties break on
    point index.
    """
    pts = _as_points(points)
    front = np.asarray(front, dtype=np.int64)
    if front.size == 0:
        return front
    if pts.shape[1] == 2:
        tail = front[np.lexsort((front, pts[front, 0]))]
        return tail[middle_out_alternation(len(tail))]
    lo = pts.min(axis=0)
    span = pts.max(axis=0) - lo
    span[span == 0] = 1.0
    normalized = (pts[front] - lo) / span
    balance = normalized.var(axis=1)
    return front[np.lexsort((front, balance))]
