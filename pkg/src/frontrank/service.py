"""HTTP service over persisted models: retrieval and front exploration.

State lives in a data directory: ``registry.json`` maps model ids to the
dataset file (by path and content hash) and the persisted model file.
Model ids are content-derived, so registering the same dataset and config
twice is idempotent.  Every response is a pure function of the request
and the files on disk; models load read-only and are shared across
requests.  A fingerprint mismatch between the registry and the dataset
file refuses service instead of recomputing.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field

from . import __version__
from .data import (
    FeatureDataset,
    LabelMatrix,
    QuerySet,
    RetrievalConfig,
    dataset_fingerprint,
    load_dataset,
)
from .emr import build_emr_model, load_model, save_model
from .engine import (
    RetrievalResult,
    mq_avg_retrieve,
    mq_max_retrieve,
    pfm_retrieve,
    scalarized_retrieve,
)
from .errors import FrontrankError, ValidationError
from .pareto import non_dominated_sort
from .engine import dissimilarities, per_query_scores

__all__ = ["create_app", "ModelRegistry", "RegistryEntry", "grouped_fronts"]


@dataclass
class RegistryEntry:
    model_id: str
    dataset_path: str
    dataset_format: str
    fingerprint: str
    model_file: str
    config: dict
    seed: int


class ModelRegistry:
    """JSON-backed map of model ids to dataset fingerprints and model files."""

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.models_dir = self.data_dir / "models"
        self.models_dir.mkdir(parents=True, exist_ok=True)
        self.path = self.data_dir / "registry.json"
        self._lock = threading.Lock()

    def _read(self) -> dict:
        if not self.path.exists():
            return {}
        return json.loads(self.path.read_text())

    def _write(self, entries: dict) -> None:
        self.path.write_text(json.dumps(entries, indent=2, sort_keys=True))

    def get(self, model_id: str) -> RegistryEntry | None:
        raw = self._read().get(model_id)
        return RegistryEntry(**raw) if raw else None

    def register(
        self,
        dataset_path: str | Path,
        dataset_format: str,
        config: RetrievalConfig,
        seed: int,
    ) -> RegistryEntry:
        """Build (or reuse) a model for the dataset; returns its entry."""
        dataset_path = str(Path(dataset_path).resolve())
        fingerprint = dataset_fingerprint(dataset_path)
        config_dict = asdict(config)
        model_id = hashlib.sha256(
            json.dumps(
                {"fingerprint": fingerprint, "config": config_dict, "seed": seed},
                sort_keys=True,
            ).encode()
        ).hexdigest()[:12]
        with self._lock:  # builds are serialized per registry
            existing = self.get(model_id)
            if existing is not None:
                return existing
            ds, _ = load_dataset(dataset_path, format=dataset_format)
            config.check_dataset(ds)
            model = build_emr_model(ds, config, rng_seed=seed)
            model_file = self.models_dir / f"{model_id}.emr"
            save_model(model, model_file)
            entry = RegistryEntry(
                model_id=model_id,
                dataset_path=dataset_path,
                dataset_format=dataset_format,
                fingerprint=fingerprint,
                model_file=str(model_file),
                config=config_dict,
                seed=seed,
            )
            entries = self._read()
            entries[model_id] = asdict(entry)
            self._write(entries)
            return entry


class _LoadedModel:
    def __init__(self, entry: RegistryEntry):
        ds, labels = load_dataset(entry.dataset_path, format=entry.dataset_format)
        self.entry = entry
        self.dataset = ds
        self.labels = labels
        self.model = load_model(entry.model_file, dataset=ds)
        self.index_of = {item_id: i for i, item_id in enumerate(ds.item_ids)}
        thumbs_path = Path(entry.dataset_path).with_suffix(".thumbs.json")
        self.thumbnails = (
            json.loads(thumbs_path.read_text()) if thumbs_path.exists() else {}
        )


class BuildConfig(BaseModel):
    alpha: float = 0.99
    anchor_count: int = 32
    nearest_anchors: int = 3
    sigma: float = 1.0
    seed: int = 0


class BuildModelRequest(BaseModel):
    dataset_path: str
    dataset_format: str = "binary"
    config: BuildConfig = BuildConfig()


class RetrieveRequest(BaseModel):
    model_id: str
    query_ids: list[int] = Field(min_length=1)
    k: int = Field(ge=1)
    method: str = "pfm"
    weights: list[float] | None = None


def _item_payload(item) -> dict:
    return {
        "item_id": item.item_id,
        "item_index": item.item_index,
        "coords": list(item.coords),
        "position": item.position,
        "score": item.score,
    }


def grouped_fronts(result: RetrievalResult) -> list[list[dict]]:
    """pfm items grouped by front in retrieval order; one flat group otherwise."""
    if result.method != "pfm":
        group = []
        for rank, item in enumerate(result.items):
            payload = _item_payload(item)
            payload["position"] = rank
            group.append(payload)
        return [group]
    groups: list[list[dict]] = []
    current_front: int | None = None
    for item in result.items:
        if item.front != current_front:
            groups.append([])
            current_front = item.front
        groups[-1].append(_item_payload(item))
    return groups


def create_app(data_dir: str | Path) -> FastAPI:
    app = FastAPI(title="frontrank", version=__version__)
    registry = ModelRegistry(Path(data_dir))
    cache: dict[str, _LoadedModel] = {}
    cache_lock = threading.Lock()

    def loaded(model_id: str) -> _LoadedModel:
        with cache_lock:
            if model_id in cache:
                return cache[model_id]
        entry = registry.get(model_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown model_id {model_id!r}")
        current = dataset_fingerprint(entry.dataset_path)
        if current != entry.fingerprint:
            raise HTTPException(
                status_code=409,
                detail={
                    "error_code": "fingerprint_mismatch",
                    "message": "dataset file changed since the model was built",
                },
            )
        lm = _LoadedModel(entry)
        with cache_lock:
            cache.setdefault(model_id, lm)
            return cache[model_id]

    def query_set_or_422(box: _LoadedModel, query_ids: list[int]) -> QuerySet:
        try:
            qs = QuerySet(tuple(query_ids))
            from .data import validate_query_set

            validate_query_set(qs, box.dataset)
            return qs
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/models")
    def build(req: BuildModelRequest):
        try:
            config = RetrievalConfig(
                alpha=req.config.alpha,
                anchor_count=req.config.anchor_count,
                nearest_anchors=req.config.nearest_anchors,
                sigma=req.config.sigma,
            )
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        if not Path(req.dataset_path).exists():
            raise HTTPException(
                status_code=404, detail=f"dataset file not found: {req.dataset_path}"
            )
        try:
            entry = registry.register(
                req.dataset_path, req.dataset_format, config, req.config.seed
            )
        except FrontrankError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {"model_id": entry.model_id}

    @app.post("/retrieve")
    def retrieve(req: RetrieveRequest):
        box = loaded(req.model_id)
        qs = query_set_or_422(box, req.query_ids)
        started = time.perf_counter()
        try:
            if req.method == "pfm":
                result = pfm_retrieve(box.dataset, box.model, qs, k=req.k)
            elif req.method == "mq_avg":
                result = mq_avg_retrieve(box.dataset, box.model, qs, k=req.k)
            elif req.method == "mq_max":
                result = mq_max_retrieve(box.dataset, box.model, qs, k=req.k)
            elif req.method == "scalarized":
                weights = req.weights if req.weights is not None else [1.0] * qs.t
                result = scalarized_retrieve(
                    box.dataset, box.model, qs, weights=weights, k=req.k
                )
            else:
                raise HTTPException(
                    status_code=422, detail=f"unknown method {req.method!r}"
                )
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except FrontrankError as exc:
            raise HTTPException(
                status_code=500,
                detail={"error_code": type(exc).__name__, "message": str(exc)},
            ) from exc
        timing_ms = (time.perf_counter() - started) * 1000.0
        return {
            "model_id": req.model_id,
            "method": result.method,
            "query_ids": list(qs.indices),
            "k": req.k,
            "fronts": grouped_fronts(result),
            "timing_ms": timing_ms,
        }

    @app.get("/fronts/{model_id}")
    def fronts(
        model_id: str,
        queries: str = Query(..., description="comma-separated query indices"),
        depth: int = Query(..., ge=1),
    ):
        box = loaded(model_id)
        try:
            query_ids = [int(part) for part in queries.split(",") if part != ""]
        except ValueError as exc:
            raise HTTPException(status_code=422, detail="queries must be integers") from exc
        qs = query_set_or_422(box, query_ids)
        started = time.perf_counter()
        try:
            d = dissimilarities(per_query_scores(box.model, qs))
        except FrontrankError as exc:
            raise HTTPException(
                status_code=500,
                detail={"error_code": type(exc).__name__, "message": str(exc)},
            ) from exc
        cand = np.array(
            [i for i in range(box.dataset.n) if i not in qs.indices], dtype=np.int64
        )
        layering = non_dominated_sort(d[:, cand].T)
        payload = []
        for front in layering.fronts[:depth]:
            items = cand[front]
            # tail-to-tail: first dissimilarity ascending, item index breaks ties
            tail = items[np.lexsort((items, d[0, items]))]
            payload.append(
                [
                    {
                        "item_id": box.dataset.item_ids[idx],
                        "item_index": int(idx),
                        "coords": [float(v) for v in d[:, idx]],
                        "position": pos,
                    }
                    for pos, idx in enumerate(tail)
                ]
            )
        return {
            "model_id": model_id,
            "query_ids": list(qs.indices),
            "depth": depth,
            "n_fronts_total": layering.n_fronts,
            "fronts": payload,
            "timing_ms": (time.perf_counter() - started) * 1000.0,
        }

    @app.get("/items/{item_id}")
    def item(item_id: str, model_id: str = Query(...)):
        box = loaded(model_id)
        idx = box.index_of.get(item_id)
        if idx is None:
            raise HTTPException(status_code=404, detail=f"unknown item {item_id!r}")
        labels = (
            box.labels.labels[idx].tolist() if box.labels is not None else None
        )
        return {
            "item_id": item_id,
            "item_index": idx,
            "labels": labels,
            "thumbnail": box.thumbnails.get(item_id),
            "feature_dim": box.dataset.m,
        }

    return app
