"""Manifold ranking: an anchor-graph fast path plus dense small-n oracles.

The fast path builds a bipartite weighting between items and a small set
of anchor points, giving the affinity W = Z^T Z implicitly.  Ranking a
query then needs one (A x A) factorization at build time and O(A n) work
per query:

    r = (I_n - H^T (H H^T - (1/alpha) I_A)^{-1} H) y,   H = Z D^{-1/2}

which equals (I_n - alpha S)^{-1} y for S = D^{-1/2} W D^{-1/2} by the
Woodbury identity.  The dense ranker solves that same system explicitly on
a graph built by adding pairwise edges in ascending distance order until
connected; it exists as an oracle and refuses large inputs.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from .data import FeatureDataset, RetrievalConfig
from .errors import (
    ConnectivityError,
    ConvergenceError,
    DimensionError,
    ModelMismatchError,
    NumericalError,
    ParseError,
    SizeCapError,
)

__all__ = [
    "EmrModel",
    "RankingVector",
    "build_emr_model",
    "emr_rank",
    "classic_mr_rank",
    "classic_mr_iterate",
    "save_model",
    "load_model",
]

CLASSIC_DENSE_CAP = 2000

_MODEL_MAGIC = b"FREM"
_MODEL_VERSION = 1


@dataclass(frozen=True)
class RankingVector:
    """Per-item ranking scores for one initial vector."""

    scores: np.ndarray
    query_index: int | None = None


@dataclass(frozen=True)
class EmrModel:
    """Precomputed anchor-graph ranking operator for one dataset.

    anchors: (A, m) anchor coordinates.
    weights: (A, n) column-stochastic sparse matrix; column i carries item
        i's kernel weights over its nearest anchors (at most s nonzeros).
    degree: (n,) strictly positive degrees D_ii = sum_j z_i . z_j.
    core_inverse: (A, A) inverse of H H^T - (1/alpha) I.
    """

    anchors: np.ndarray
    weights: sparse.csc_matrix
    degree: np.ndarray
    core_inverse: np.ndarray
    alpha: float

    @property
    def n(self) -> int:
        return self.weights.shape[1]

    @property
    def n_anchors(self) -> int:
        return self.weights.shape[0]

    @property
    def m(self) -> int:
        return self.anchors.shape[1]

    def h_matrix(self) -> sparse.csc_matrix:
        """H = Z D^{-1/2}, the degree-normalized anchor weighting."""
        inv_sqrt = 1.0 / np.sqrt(self.degree)
        return self.weights.multiply(inv_sqrt[None, :]).tocsc()


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(x)
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    closest = np.sum((x - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total <= 0:
            centers[j] = x[rng.integers(n)]
        else:
            centers[j] = x[rng.choice(n, p=closest / total)]
        closest = np.minimum(closest, np.sum((x - centers[j]) ** 2, axis=1))
    return centers


def _kmeans(x: np.ndarray, k: int, rng: np.random.Generator, iters: int = 50) -> np.ndarray:
    centers = _kmeans_pp_init(x, k, rng)
    assign = np.full(len(x), -1)
    for _ in range(iters):
        d2 = _sq_dists(x, centers)
        new_assign = d2.argmin(axis=1)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            members = assign == j
            if members.any():
                centers[j] = x[members].mean(axis=0)
            # empty cluster keeps its previous center
    return centers


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(a**2, axis=1)[:, None]
        + np.sum(b**2, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    return np.maximum(d2, 0.0)


def _anchor_weights(
    x: np.ndarray, anchors: np.ndarray, s: int, item_ids: tuple[str, ...]
) -> sparse.csc_matrix:
    """Column-stochastic weights over each item's s nearest anchors.

    Triangular kernel max(0, 1 - d/h) with h the distance to the (s+1)-th
    nearest anchor (the farthest anchor when s equals the anchor count).
    A column whose kernel values all vanish falls back to uniform 1/s over
    the s nearest anchors so every item stays connected.
    """
    n = len(x)
    n_anchors = len(anchors)
    dists = np.sqrt(_sq_dists(x, anchors))
    take = min(s + 1, n_anchors)
    part = np.argpartition(dists, take - 1, axis=1)[:, :take]
    part_d = np.take_along_axis(dists, part, axis=1)
    order = np.argsort(part_d, axis=1, kind="stable")
    nearest = np.take_along_axis(part, order, axis=1)
    nearest_d = np.take_along_axis(part_d, order, axis=1)

    rows = np.empty(n * s, dtype=np.int64)
    data = np.empty(n * s, dtype=np.float64)
    for i in range(n):
        h = nearest_d[i, s] if take > s else nearest_d[i, s - 1]
        if h <= 0:
            weights = np.zeros(s)
        else:
            weights = np.maximum(0.0, 1.0 - nearest_d[i, :s] / h)
        total = weights.sum()
        if total <= 0:
            weights = np.full(s, 1.0 / s)
            total = 1.0
        rows[i * s : (i + 1) * s] = nearest[i, :s]
        data[i * s : (i + 1) * s] = weights / total
    cols = np.repeat(np.arange(n), s)
    z = sparse.csc_matrix((data, (rows, cols)), shape=(n_anchors, n))
    col_sums = np.asarray(z.sum(axis=0)).ravel()
    dead = np.flatnonzero(col_sums <= 0)
    if dead.size:
        raise ConnectivityError(
            f"item {item_ids[dead[0]]!r} has zero weight to every anchor"
        )
    return z


def build_emr_model(
    ds: FeatureDataset, cfg: RetrievalConfig, rng_seed: int
) -> EmrModel:
    """Build the anchor-graph ranking operator for a dataset.

    Anchors come from seeded k-means (k-means++ init, 50 iterations), so
    the result is bit-identical for a fixed seed.
    """
    cfg.check_dataset(ds)
    rng = np.random.default_rng(rng_seed)
    x = ds.features
    anchors = _kmeans(x, cfg.anchor_count, rng)
    z = _anchor_weights(x, anchors, cfg.nearest_anchors, ds.item_ids)

    anchor_mass = np.asarray(z.sum(axis=1)).ravel()  # sum_j z_j
    degree = z.T @ anchor_mass
    bad = np.flatnonzero(degree <= 0)
    if bad.size:
        raise ConnectivityError(
            f"item {ds.item_ids[bad[0]]!r} has zero degree in the anchor graph"
        )

    h = z.multiply((1.0 / np.sqrt(degree))[None, :]).tocsc()
    core = (h @ h.T).toarray() - (1.0 / cfg.alpha) * np.eye(cfg.anchor_count)
    try:
        core_inverse = np.linalg.inv(core)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"anchor core matrix is singular: {exc}") from exc
    if not np.all(np.isfinite(core_inverse)):
        raise NumericalError("anchor core inverse has non-finite entries")

    return EmrModel(
        anchors=anchors,
        weights=z,
        degree=degree,
        core_inverse=core_inverse,
        alpha=cfg.alpha,
    )


def emr_rank(model: EmrModel, y, query_index: int | None = None) -> RankingVector:
    """Rank all items against the initial vector ``y`` in O(A n).

    Computes r = y - H^T (H H^T - (1/alpha) I)^{-1} H y, the exact
    minimizer of the smoothness-plus-fidelity ranking cost on the anchor
    graph.  Linear in y.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (model.n,):
        raise DimensionError(f"y has shape {y.shape}, expected ({model.n},)")
    h = model.h_matrix()
    scores = np.asarray(y - h.T @ (model.core_inverse @ (h @ y)))
    if not np.all(np.isfinite(scores)):
        raise NumericalError("ranking produced non-finite scores")
    return RankingVector(scores=scores, query_index=query_index)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.components = n

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        self.components -= 1
        return True


def connected_distance_graph(features: np.ndarray, sigma: float) -> np.ndarray:
    """Dense affinity over the shortest pairwise edges reaching connectivity.

    Pairs are sorted by distance (ties by index) and added one at a time;
    the edge set stops exactly at the first edge that makes the graph
    connected.  Included edges get weight exp(-d^2 / 2 sigma^2).
    """
    n = len(features)
    if n == 1:
        return np.zeros((1, 1))
    d2 = _sq_dists(features, features)
    iu, ju = np.triu_indices(n, k=1)
    order = np.lexsort((ju, iu, d2[iu, ju]))
    uf = _UnionFind(n)
    w = np.zeros((n, n))
    for e in order:
        i, j = int(iu[e]), int(ju[e])
        weight = np.exp(-d2[i, j] / (2.0 * sigma * sigma))
        w[i, j] = w[j, i] = weight
        uf.union(i, j)
        if uf.components == 1:
            break
    return w


def _normalized_affinity(features: np.ndarray, sigma: float) -> np.ndarray:
    w = connected_distance_graph(features, sigma)
    deg = w.sum(axis=1)
    deg[deg == 0] = 1.0  # only possible for a single-point dataset
    inv_sqrt = 1.0 / np.sqrt(deg)
    return w * inv_sqrt[:, None] * inv_sqrt[None, :]


def _check_classic_inputs(ds: FeatureDataset, query: int, alpha: float) -> None:
    if ds.n > CLASSIC_DENSE_CAP:
        raise SizeCapError(
            f"dense ranking capped at n={CLASSIC_DENSE_CAP}; build an anchor"
            f" model for n={ds.n}"
        )
    if not 0 <= query < ds.n:
        raise DimensionError(f"query index {query} out of range [0, {ds.n})")
    if not 0.0 <= alpha < 1.0:
        raise SizeCapError(f"alpha must lie in [0, 1) for the dense solver, got {alpha}")


def classic_mr_rank(
    ds: FeatureDataset, query: int, sigma: float, alpha: float
) -> RankingVector:
    """Exact dense solve of (I - alpha S) r = e_query; small n only."""
    _check_classic_inputs(ds, query, alpha)
    s = _normalized_affinity(ds.features, sigma)
    y = np.zeros(ds.n)
    y[query] = 1.0
    scores = np.linalg.solve(np.eye(ds.n) - alpha * s, y)
    return RankingVector(scores=scores, query_index=query)


def classic_mr_iterate(
    ds: FeatureDataset,
    query: int,
    sigma: float,
    alpha: float,
    tol: float = 1e-10,
    max_iter: int = 10000,
) -> RankingVector:
    """Power iteration r <- alpha S r + (1 - alpha) y on the same graph.

    The fixed point is (1 - alpha) (I - alpha S)^{-1} y, so the converged
    iterate is rescaled by 1/(1 - alpha) to agree with the closed form of
    :func:`classic_mr_rank`.
    """
    _check_classic_inputs(ds, query, alpha)
    s = _normalized_affinity(ds.features, sigma)
    y = np.zeros(ds.n)
    y[query] = 1.0
    r = y.copy()
    for _ in range(max_iter):
        r_next = alpha * (s @ r) + (1.0 - alpha) * y
        residual = float(np.max(np.abs(r_next - r)))
        r = r_next
        if residual < tol:
            return RankingVector(scores=r / (1.0 - alpha), query_index=query)
    raise ConvergenceError(
        f"no convergence within {max_iter} iterations", residual=residual
    )


def save_model(model: EmrModel, path) -> None:
    """Persist a model: anchors, sparse weights (CSC), degrees, core inverse."""
    z = model.weights.tocsc()
    z.sort_indices()
    parts = [
        _MODEL_MAGIC,
        struct.pack("<I", _MODEL_VERSION),
        struct.pack("<QQQ", model.n_anchors, model.m, model.n),
        struct.pack("<d", model.alpha),
        np.ascontiguousarray(model.anchors, dtype="<f8").tobytes(),
        struct.pack("<Q", z.nnz),
        np.ascontiguousarray(z.indptr, dtype="<i8").tobytes(),
        np.ascontiguousarray(z.indices, dtype="<i8").tobytes(),
        np.ascontiguousarray(z.data, dtype="<f8").tobytes(),
        np.ascontiguousarray(model.degree, dtype="<f8").tobytes(),
        np.ascontiguousarray(model.core_inverse, dtype="<f8").tobytes(),
    ]
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def load_model(path, dataset: FeatureDataset | None = None) -> EmrModel:
    """Load a persisted model, optionally checking it against a dataset."""
    raw = Path(path).read_bytes()
    off = 0

    def take(size: int) -> bytes:
        nonlocal off
        if off + size > len(raw):
            raise ParseError("truncated model file")
        chunk = raw[off : off + size]
        off += size
        return chunk

    if take(4) != _MODEL_MAGIC:
        raise ParseError("bad magic; not a model file")
    (version,) = struct.unpack("<I", take(4))
    if version != _MODEL_VERSION:
        raise ParseError(f"unsupported model version {version}")
    n_anchors, m, n = struct.unpack("<QQQ", take(24))
    (alpha,) = struct.unpack("<d", take(8))
    anchors = np.frombuffer(take(8 * n_anchors * m), dtype="<f8").reshape(n_anchors, m).copy()
    (nnz,) = struct.unpack("<Q", take(8))
    indptr = np.frombuffer(take(8 * (n + 1)), dtype="<i8").copy()
    indices = np.frombuffer(take(8 * nnz), dtype="<i8").copy()
    values = np.frombuffer(take(8 * nnz), dtype="<f8").copy()
    degree = np.frombuffer(take(8 * n), dtype="<f8").copy()
    core_inverse = (
        np.frombuffer(take(8 * n_anchors * n_anchors), dtype="<f8")
        .reshape(n_anchors, n_anchors)
        .copy()
    )
    z = sparse.csc_matrix((values, indices, indptr), shape=(n_anchors, n))
    model = EmrModel(
        anchors=anchors, weights=z, degree=degree, core_inverse=core_inverse, alpha=alpha
    )
    if dataset is not None:
        if dataset.n != model.n or dataset.m != model.m:
            raise ModelMismatchError(
                f"model built for n={model.n}, m={model.m}; dataset has "
                f"n={dataset.n}, m={dataset.m}"
            )
    return model
