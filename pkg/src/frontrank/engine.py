"""Multi-query retrieval: front-by-front ranking plus fusion baselines.

Each query is issued individually through the anchor-graph ranker; the
per-query scores become dissimilarities d_i = 1 - r_i, one coordinate per
query.  The front method (``pfm``) sorts those T-dimensional points into
Pareto fronts and returns fronts in depth order, each traversed from its
most balanced point outward.  Baselines rank by the mean, the max, or a
fixed nonnegative weighting of the per-query scores.

Scores are used raw: nothing is clipped to [0, 1], since dominance only
depends on the coordinatewise order and clipping would destroy it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import FeatureDataset, QuerySet, validate_query_set
from .emr import EmrModel, emr_rank
from .errors import DimensionError, ValidationError
from .pareto import ParetoLayering, middle_out_order, non_dominated_sort

__all__ = [
    "RetrievedItem",
    "RetrievalResult",
    "per_query_scores",
    "dissimilarities",
    "pareto_retrieval_order",
    "score_retrieval_order",
    "pfm_retrieve",
    "mq_avg_retrieve",
    "mq_max_retrieve",
    "scalarized_retrieve",
]

METHODS = ("pfm", "mq_avg", "mq_max", "scalarized")


@dataclass(frozen=True)
class RetrievedItem:
    item_id: str
    item_index: int
    coords: tuple[float, ...]
    front: int | None = None          # 1-based Pareto depth (pfm only)
    position: int | None = None       # tail-to-tail position within the front
    score: float | None = None        # fusion score (baselines only)

    def to_json(self) -> dict:
        return {
            "item_id": self.item_id,
            "item_index": self.item_index,
            "coords": list(self.coords),
            "front": self.front,
            "position": self.position,
            "score": self.score,
        }


@dataclass(frozen=True)
class RetrievalResult:
    """Ordered retrieval list with per-query dissimilarities as provenance."""

    items: tuple[RetrievedItem, ...]
    method: str
    query_indices: tuple[int, ...]
    weights: tuple[float, ...] | None = None
    layering: ParetoLayering | None = field(default=None, compare=False)

    def indices(self) -> list[int]:
        return [it.item_index for it in self.items]

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "query_indices": list(self.query_indices),
            "weights": list(self.weights) if self.weights is not None else None,
            "items": [it.to_json() for it in self.items],
        }


def per_query_scores(model: EmrModel, qs: QuerySet) -> np.ndarray:
    """(T, n) ranking scores, one row per individually issued query."""
    scores = np.empty((qs.t, model.n))
    for row, q in enumerate(qs.indices):
        y = np.zeros(model.n)
        y[q] = 1.0
        scores[row] = emr_rank(model, y, query_index=q).scores
    return scores


def dissimilarities(scores: np.ndarray) -> np.ndarray:
    """d = 1 - r, rowwise; may leave [0, 1] and that is fine."""
    return 1.0 - np.asarray(scores, dtype=float)


def _candidates(n: int, exclude) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    for i in exclude:
        mask[i] = False
    cand = np.flatnonzero(mask)
    if cand.size == 0:
        raise ValidationError("no candidate items left after exclusions")
    return cand


def pareto_retrieval_order(
    dissim: np.ndarray, exclude=(), k: int | None = None
) -> tuple[list[tuple[int, int, int]], ParetoLayering, np.ndarray]:
    """Front-by-front ordering of the columns of a (T, n) dissimilarity matrix.

    Returns ``(entries, layering, candidates)`` where entries are
    ``(item_index, front, position)`` in retrieval order.  ``position`` is
    the item's place along its front sorted by the first coordinate
    (ties by item index), so 0 and len-1 are the tails; fronts are emitted
    in depth order and traversed middle-out.  The layering is over the
    candidate (non-excluded) columns.
    """
    dissim = np.asarray(dissim, dtype=float)
    if dissim.ndim != 2:
        raise DimensionError("dissimilarities must be a (T, n) matrix")
    cand = _candidates(dissim.shape[1], exclude)
    pts = dissim[:, cand].T
    layering = non_dominated_sort(pts)
    limit = len(cand) if k is None else min(k, len(cand))

    entries: list[tuple[int, int, int]] = []
    for depth, front in enumerate(layering.fronts, start=1):
        if len(entries) >= limit:
            break
        # tail-to-tail order: first coordinate ascending, item index breaking ties
        tail = front[np.lexsort((cand[front], pts[front, 0]))]
        tail_pos = {int(local): pos for pos, local in enumerate(tail)}
        for local in middle_out_order(front, pts):
            entries.append((int(cand[local]), depth, tail_pos[int(local)]))
            if len(entries) >= limit:
                break
    return entries, layering, cand


def score_retrieval_order(values: np.ndarray, exclude=(), k: int | None = None) -> np.ndarray:
    """Indices sorted by descending value, ties by index ascending."""
    values = np.asarray(values, dtype=float)
    cand = _candidates(len(values), exclude)
    order = cand[np.lexsort((cand, -values[cand]))]
    return order if k is None else order[:k]


def _clamp_k(k: int, available: int) -> int:
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    return min(k, available)


def _prepare(ds: FeatureDataset, model: EmrModel, qs: QuerySet) -> np.ndarray:
    if model.n != ds.n:
        raise DimensionError(f"model holds {model.n} items, dataset {ds.n}")
    validate_query_set(qs, ds)
    return per_query_scores(model, qs)


def pfm_retrieve(
    ds: FeatureDataset, model: EmrModel, qs: QuerySet, k: int
) -> RetrievalResult:
    """Rank items by Pareto-front depth over per-query dissimilarities.

    Query items are excluded from the candidates before sorting; each
    front is returned middle-out so items balanced across all queries come
    before the tails.
    """
    scores = _prepare(ds, model, qs)
    d = dissimilarities(scores)
    k = _clamp_k(k, ds.n - qs.t)
    entries, layering, _ = pareto_retrieval_order(d, exclude=qs.indices, k=k)
    items = tuple(
        RetrievedItem(
            item_id=ds.item_ids[idx],
            item_index=idx,
            coords=tuple(d[:, idx]),
            front=depth,
            position=pos,
        )
        for idx, depth, pos in entries
    )
    return RetrievalResult(
        items=items, method="pfm", query_indices=qs.indices, layering=layering
    )


def _score_result(
    ds: FeatureDataset,
    d: np.ndarray,
    fused: np.ndarray,
    qs: QuerySet,
    k: int,
    method: str,
    weights: tuple[float, ...] | None = None,
) -> RetrievalResult:
    k = _clamp_k(k, ds.n - qs.t)
    order = score_retrieval_order(fused, exclude=qs.indices, k=k)
    items = tuple(
        RetrievedItem(
            item_id=ds.item_ids[idx],
            item_index=int(idx),
            coords=tuple(d[:, idx]),
            score=float(fused[idx]),
        )
        for idx in order
    )
    return RetrievalResult(
        items=items, method=method, query_indices=qs.indices, weights=weights
    )


def mq_avg_retrieve(
    ds: FeatureDataset, model: EmrModel, qs: QuerySet, k: int
) -> RetrievalResult:
    """Rank by the mean of per-query scores (equal-weight scalarization)."""
    scores = _prepare(ds, model, qs)
    return _score_result(
        ds, dissimilarities(scores), scores.mean(axis=0), qs, k, "mq_avg"
    )


def mq_max_retrieve(
    ds: FeatureDataset, model: EmrModel, qs: QuerySet, k: int
) -> RetrievalResult:
    """Rank by the best single-query score per item."""
    scores = _prepare(ds, model, qs)
    return _score_result(
        ds, dissimilarities(scores), scores.max(axis=0), qs, k, "mq_max"
    )


def scalarized_retrieve(
    ds: FeatureDataset, model: EmrModel, qs: QuerySet, weights, k: int
) -> RetrievalResult:
    """Rank by a fixed nonnegative weighting of the per-query scores."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (qs.t,):
        raise DimensionError(f"need {qs.t} weights, got shape {weights.shape}")
    if np.any(weights < 0) or weights.sum() <= 0:
        raise ValidationError("weights must be nonnegative with positive sum")
    scores = _prepare(ds, model, qs)
    return _score_result(
        ds,
        dissimilarities(scores),
        weights @ scores,
        qs,
        k,
        "scalarized",
        weights=tuple(float(w) for w in weights),
    )
