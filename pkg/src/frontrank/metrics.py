"""Retrieval evaluation: unique relevance, nDCG, and front profiles.

The relevance score for multi-query retrieval measures the fraction of
the union of query labels covered by an item, zeroed unless the item
holds at least one label unique to every query.  nDCG discounts ranked
relevances by log2 of the position and normalizes by the all-ones ideal.
The query-pair experiment averages nDCG curves over sampled pairs and
over independently seeded models, and interpolates per-front relevance
onto a fixed grid to profile where the useful items sit along each front.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import FeatureDataset, LabelMatrix, QuerySet
from .emr import EmrModel
from .engine import (
    METHODS,
    dissimilarities,
    pareto_retrieval_order,
    per_query_scores,
    score_retrieval_order,
)
from .errors import UndefinedMetricError, ValidationError
from .pareto import ParetoLayering

__all__ = [
    "mq_uniq_rel",
    "mq_uniq_rel_many",
    "dcg_at_k",
    "ndcg_at_k",
    "ndcg_curve",
    "QueryPairBatch",
    "sample_query_pairs",
    "MetricReport",
    "run_query_pair_experiment",
    "front_relevance_profile",
    "make_bridge_benchmark",
]

MIN_COVERING_ITEMS = 5  # a query pair is viable when this many items score > 0


def _as_label_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValidationError("label vector must be one-dimensional")
    return arr


def mq_uniq_rel(ell, query_labels) -> float:
    """Unique-relevance of one item's label vector against T query labels.

    Let beta be the union (OR) of the query label vectors.  The score is
    |ell AND beta| / |beta| when, for every query i, the item carries at
    least one label belonging to query i and to no other query; otherwise
    the score is 0.  Raises when the queries carry no labels at all.
    """
    ell = _as_label_vector(ell)
    q = np.asarray([_as_label_vector(y) for y in query_labels], dtype=np.uint8)
    return float(mq_uniq_rel_many(ell[None, :], q)[0])


def mq_uniq_rel_many(labels: np.ndarray, query_labels: np.ndarray) -> np.ndarray:
    """Vectorized unique-relevance for an (n, C) label matrix."""
    labels = np.asarray(labels, dtype=bool)
    q = np.asarray(query_labels, dtype=bool)
    if labels.shape[1] != q.shape[1]:
        raise ValidationError("label vectors and query labels disagree on C")
    beta = q.any(axis=0)
    beta_size = int(beta.sum())
    if beta_size == 0:
        raise UndefinedMetricError("queries carry no labels; relevance undefined")
    # unique labels of query i: y_i minus labels shared with any other query
    totals = q.sum(axis=0)
    shared = totals > 1
    unique = q & ~shared[None, :]
    has_unique = (labels[:, None, :] & unique[None, :, :]).any(axis=2).all(axis=1)
    covered = (labels & beta[None, :]).sum(axis=1)
    return np.where(has_unique, covered / beta_size, 0.0)


def dcg_at_k(rels, k: int) -> float:
    """Position-discounted gain: rel_1 + sum_{i=2..k} rel_i / log2(i)."""
    rels = np.asarray(rels, dtype=float)
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if k > len(rels):
        raise ValidationError(f"k={k} exceeds the {len(rels)} available relevances")
    positions = np.arange(2, k + 1)
    return float(rels[0] + np.sum(rels[1:k] / np.log2(positions)))


def _ideal_dcg(k: int) -> float:
    positions = np.arange(2, k + 1)
    return float(1.0 + np.sum(1.0 / np.log2(positions)))


def ndcg_at_k(rels, k: int) -> float:
    """DCG normalized by the all-ones ideal; in [0, 1] when rels are."""
    return dcg_at_k(rels, k) / _ideal_dcg(k)


def ndcg_curve(rels, k_max: int) -> np.ndarray:
    """nDCG at every cutoff 1..k_max, vectorized."""
    rels = np.asarray(rels, dtype=float)
    if k_max < 1 or k_max > len(rels):
        raise ValidationError(f"k_max={k_max} out of range for {len(rels)} relevances")
    discounts = np.concatenate(([1.0], 1.0 / np.log2(np.arange(2, k_max + 1))))
    gains = np.cumsum(rels[:k_max] * discounts)
    ideals = np.cumsum(discounts)
    return gains / ideals


@dataclass(frozen=True)
class QueryPairBatch:
    """Sampled query pairs, each guaranteed to have uniquely covering items."""

    pairs: tuple[tuple[int, int], ...]
    rng_seed: int


def sample_query_pairs(
    labels: LabelMatrix,
    count: int,
    rng_seed: int,
    min_covering: int = MIN_COVERING_ITEMS,
    max_tries: int | None = None,
) -> QueryPairBatch:
    """Rejection-sample query pairs with >= min_covering positive-score items.

    Pairs whose label combination leaves nothing to retrieve (no item
    uniquely related to both) are discarded, mirroring the restriction to
    label pairs that actually have multi-class members.
    """
    rng = np.random.default_rng(rng_seed)
    n = labels.n
    if n < 3:
        raise ValidationError("need at least 3 labeled items to form pairs")
    lab = labels.labels.astype(bool)
    tries = max_tries if max_tries is not None else 1000 * count
    pairs: list[tuple[int, int]] = []
    for _ in range(tries):
        if len(pairs) >= count:
            break
        a, b = rng.choice(n, size=2, replace=False)
        q = lab[[a, b]]
        if not q.any():
            continue
        rels = mq_uniq_rel_many(lab, q)
        rels[[a, b]] = 0.0  # the queries themselves never count
        if int(np.count_nonzero(rels)) >= min_covering:
            pairs.append((int(a), int(b)))
    if len(pairs) < count:
        raise ValidationError(
            f"only {len(pairs)} viable query pairs found after {tries} draws"
        )
    return QueryPairBatch(pairs=tuple(pairs), rng_seed=rng_seed)


@dataclass
class MetricReport:
    """Averaged nDCG curves and per-front relevance profiles for a batch."""

    ndcg: dict[str, np.ndarray]
    ndcg_std: dict[str, np.ndarray]
    front_profile: np.ndarray          # (n_fronts, grid_size) mean curves
    profile_grid: np.ndarray
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "ndcg": {m: v.tolist() for m, v in self.ndcg.items()},
            "ndcg_std": {m: v.tolist() for m, v in self.ndcg_std.items()},
            "front_profile": self.front_profile.tolist(),
            "profile_grid": self.profile_grid.tolist(),
            "meta": self.meta,
        }

    def ndcg_rows(self) -> list[dict]:
        """Long-format rows: one per (method, k)."""
        rows = []
        for method, curve in self.ndcg.items():
            std = self.ndcg_std[method]
            for i, value in enumerate(curve):
                rows.append(
                    {
                        "method": method,
                        "k": i + 1,
                        "ndcg": float(value),
                        "std": float(std[i]),
                    }
                )
        return rows

    def profile_rows(self) -> list[dict]:
        rows = []
        for front_idx, curve in enumerate(self.front_profile, start=1):
            for pos, value in zip(self.profile_grid, curve):
                rows.append(
                    {
                        "front": front_idx,
                        "position": float(pos),
                        "mq_uniq_rel": float(value) if np.isfinite(value) else None,
                    }
                )
        return rows


def front_relevance_profile(
    layerings: list[ParetoLayering],
    axis_values: list[np.ndarray],
    relevances: list[np.ndarray],
    n_fronts: int = 5,
    grid_size: int = 50,
) -> tuple[np.ndarray, np.ndarray]:
    """Interpolate per-front relevance tail-to-tail onto a fixed grid.

    For every layering (one per query pair), each of the first n_fronts
    fronts is ordered by its first dissimilarity coordinate, positions are
    mapped to [0, 1], and the relevances are linearly interpolated onto a
    grid_size-point grid; curves are averaged across pairs.  A singleton
    front contributes a constant curve.  Fronts absent from every pair
    come back as NaN rows.
    """
    if n_fronts < 1 or grid_size < 2:
        raise ValidationError("need n_fronts >= 1 and grid_size >= 2")
    if not (len(layerings) == len(axis_values) == len(relevances)):
        raise ValidationError("layerings, axis values, and relevances must align")
    grid = np.linspace(0.0, 1.0, grid_size)
    total = np.zeros((n_fronts, grid_size))
    counts = np.zeros(n_fronts, dtype=np.int64)
    for layering, axis, rels in zip(layerings, axis_values, relevances):
        for depth in range(min(n_fronts, layering.n_fronts)):
            front = layering.fronts[depth]
            tail = front[np.lexsort((front, axis[front]))]
            values = np.asarray(rels, dtype=float)[tail]
            if len(tail) == 1:
                curve = np.full(grid_size, values[0])
            else:
                positions = np.linspace(0.0, 1.0, len(tail))
                curve = np.interp(grid, positions, values)
            total[depth] += curve
            counts[depth] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = total / counts[:, None]
    mean[counts == 0] = np.nan
    return mean, grid


def run_query_pair_experiment(
    ds: FeatureDataset,
    labels: LabelMatrix,
    models: list[EmrModel],
    batch: QueryPairBatch,
    methods=("pfm", "mq_avg", "mq_max"),
    k_max: int = 20,
    n_fronts: int = 5,
    grid_size: int = 50,
    scalarized_weights=None,
) -> MetricReport:
    """Average nDCG@1..k_max per method over pairs, then over models.

    Every (model, pair) run reuses one pass of per-query scoring; ``pfm``
    runs additionally feed the per-front relevance profile.
    """
    if labels.n != ds.n:
        raise ValidationError("labels do not match the dataset")
    if not models:
        raise ValidationError("need at least one model")
    if not batch.pairs:
        raise ValidationError("empty viable pair set")
    if k_max > ds.n - 2:
        raise ValidationError(
            f"k_max={k_max} exceeds the {ds.n - 2} retrievable items per pair"
        )
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ValidationError(f"unknown methods: {sorted(unknown)}")
    lab = labels.labels.astype(bool)

    per_model = {m: np.zeros((len(models), k_max)) for m in methods}
    layerings: list[ParetoLayering] = []
    axis_values: list[np.ndarray] = []
    relevances: list[np.ndarray] = []

    for mi, model in enumerate(models):
        for a, b in batch.pairs:
            qs = QuerySet((a, b))
            rels_all = mq_uniq_rel_many(lab, lab[[a, b]])
            scores = per_query_scores(model, qs)
            d = dissimilarities(scores)
            for method in methods:
                if method == "pfm":
                    entries, layering, cand = pareto_retrieval_order(
                        d, exclude=qs.indices, k=k_max
                    )
                    order = [idx for idx, _, _ in entries]
                    layerings.append(layering)
                    axis_values.append(d[0, cand])
                    relevances.append(rels_all[cand])
                elif method == "mq_avg":
                    order = score_retrieval_order(
                        scores.mean(axis=0), exclude=qs.indices, k=k_max
                    )
                elif method == "mq_max":
                    order = score_retrieval_order(
                        scores.max(axis=0), exclude=qs.indices, k=k_max
                    )
                else:
                    w = np.asarray(
                        scalarized_weights
                        if scalarized_weights is not None
                        else np.ones(qs.t),
                        dtype=float,
                    )
                    order = score_retrieval_order(
                        w @ scores, exclude=qs.indices, k=k_max
                    )
                per_model[method][mi] += ndcg_curve(rels_all[list(order)], k_max)
        for method in methods:
            per_model[method][mi] /= len(batch.pairs)

    ndcg = {m: per_model[m].mean(axis=0) for m in methods}
    ndcg_std = {m: per_model[m].std(axis=0) for m in methods}
    profile, grid = (
        front_relevance_profile(
            layerings, axis_values, relevances, n_fronts=n_fronts, grid_size=grid_size
        )
        if "pfm" in methods
        else (np.full((n_fronts, grid_size), np.nan), np.linspace(0, 1, grid_size))
    )
    return MetricReport(
        ndcg=ndcg,
        ndcg_std=ndcg_std,
        front_profile=profile,
        profile_grid=grid,
        meta={
            "n_pairs": len(batch.pairs),
            "n_models": len(models),
            "pair_seed": batch.rng_seed,
            "k_max": k_max,
            "methods": list(methods),
            "n_fronts": n_fronts,
            "grid_size": grid_size,
        },
    )


def make_bridge_benchmark(
    n_core: int = 60,
    n_bridge: int = 30,
    n_distractor: int = 40,
    m: int = 16,
    seed: int = 0,
) -> tuple[FeatureDataset, LabelMatrix]:
    """Synthetic multi-label benchmark with items relevant to two classes.

    Three labeled Gaussian clusters sit on a line in the two informative
    dimensions: class-A items, class-B items, and a bridge cluster halfway
    between them carrying both labels; a class-C distractor cluster sits
    off-axis.  The remaining dimensions are low-variance noise.  Query
    pairs drawn from A and B have the bridge as their uniquely covering
    items, which is the structure multi-query retrieval is meant to find.
    """
    if m < 2:
        raise ValidationError("need at least two feature dimensions")
    rng = np.random.default_rng(seed)
    centers = {
        "a": (0.0, 0.0),
        "ab": (3.0, 0.0),
        "b": (6.0, 0.0),
        "c": (3.0, 9.0),
    }
    sizes = {"a": n_core, "ab": n_bridge, "b": n_core, "c": n_distractor}
    class_labels = {"a": (1, 0, 0), "ab": (1, 1, 0), "b": (0, 1, 0), "c": (0, 0, 1)}
    spread, noise = 0.9, 0.25

    ids: list[str] = []
    rows: list[np.ndarray] = []
    labels: list[tuple[int, int, int]] = []
    for name in ("a", "ab", "b", "c"):
        cx, cy = centers[name]
        count = sizes[name]
        block = rng.normal(0.0, noise, size=(count, m))
        block[:, 0] = cx + rng.normal(0.0, spread, size=count)
        block[:, 1] = cy + rng.normal(0.0, spread, size=count)
        for i in range(count):
            ids.append(f"{name}{i:03d}")
            rows.append(block[i])
            labels.append(class_labels[name])
    ds = FeatureDataset(item_ids=tuple(ids), features=np.asarray(rows))
    lm = LabelMatrix(labels=np.asarray(labels, dtype=np.uint8))
    return ds, lm
