"""Datasets, labels, query sets, and retrieval configuration.

Two on-disk formats are supported.  CSV: a header row, column 1 the item
id, columns 2..m+1 the features, then optional trailing ``label_*``
columns holding binary class labels.  Binary: little-endian, a versioned
magic header, the counts (n, m, C), length-prefixed UTF-8 item ids,
row-major float64 features, and one byte per label entry.  Features are
stored and used as-is; normalization only ever happens through the
explicit helpers below.
"""

from __future__ import annotations

import csv
import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IntegrityError, ParseError, ValidationError

__all__ = [
    "FeatureDataset",
    "LabelMatrix",
    "QuerySet",
    "RetrievalConfig",
    "load_dataset",
    "save_dataset",
    "validate_query_set",
    "normalize_features",
    "dataset_fingerprint",
]

_BINARY_MAGIC = b"FRDS"
_BINARY_VERSION = 1


@dataclass(frozen=True)
class FeatureDataset:
    """Immutable n x m feature matrix with one opaque string id per item."""

    item_ids: tuple[str, ...]
    features: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[0] < 1 or feats.shape[1] < 1:
            raise IntegrityError("features must be a nonempty (n, m) matrix")
        if len(self.item_ids) != feats.shape[0]:
            raise IntegrityError(
                f"{len(self.item_ids)} ids for {feats.shape[0]} feature rows"
            )
        if len(set(self.item_ids)) != len(self.item_ids):
            raise IntegrityError("item ids are not unique")
        if not np.all(np.isfinite(feats)):
            raise IntegrityError("features contain non-finite entries")
        feats.flags.writeable = False
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "item_ids", tuple(self.item_ids))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def m(self) -> int:
        return self.features.shape[1]

    def index_of(self, item_id: str) -> int:
        try:
            return self.item_ids.index(item_id)
        except ValueError:
            raise KeyError(item_id) from None


@dataclass(frozen=True)
class LabelMatrix:
    """n x C binary label matrix aligned with a dataset's rows."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2 or labels.shape[1] < 1:
            raise IntegrityError("labels must be a (n, C) matrix")
        if not np.isin(labels, (0, 1)).all():
            raise IntegrityError("label entries must be exactly 0 or 1")
        labels = labels.astype(np.uint8)
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    @property
    def n_classes(self) -> int:
        return self.labels.shape[1]


@dataclass(frozen=True)
class QuerySet:
    """Indices of the in-sample query items; distinct, at least one."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(idx) < 1:
            raise ValidationError("query set must contain at least one index")
        if len(set(idx)) != len(idx):
            raise ValidationError("query indices must be distinct")
        object.__setattr__(self, "indices", idx)

    @property
    def t(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class RetrievalConfig:
    """Knobs shared by model building and retrieval.

    alpha is the smoothness/fidelity trade-off of manifold ranking,
    strictly inside (0, 1).  anchor_count and nearest_anchors size the
    anchor graph; sigma is the kernel bandwidth of the dense small-n
    ranker; k_return is the default number of items to return.
    """

    alpha: float = 0.99
    anchor_count: int = 32
    nearest_anchors: int = 3
    sigma: float = 1.0
    k_return: int = 20

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError(f"alpha must lie strictly in (0, 1), got {self.alpha}")
        if self.anchor_count < 1:
            raise ValidationError("anchor_count must be positive")
        if not 1 <= self.nearest_anchors <= self.anchor_count:
            raise ValidationError("nearest_anchors must lie in [1, anchor_count]")
        if self.sigma <= 0:
            raise ValidationError("sigma must be positive")
        if self.k_return < 1:
            raise ValidationError("k_return must be positive")

    def check_dataset(self, ds: FeatureDataset) -> None:
        if self.anchor_count > ds.n:
            raise ValidationError(
                f"anchor_count {self.anchor_count} exceeds dataset size {ds.n}"
            )


def validate_query_set(qs: QuerySet, ds: FeatureDataset) -> None:
    """Raise ValidationError unless all query indices are distinct and in range."""
    seen = set()
    for i in qs.indices:
        if not 0 <= i < ds.n:
            raise ValidationError(f"query index {i} out of range [0, {ds.n})")
        if i in seen:
            raise ValidationError(f"duplicate query index {i}")
        seen.add(i)


def _parse_float(text: str, row: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"non-numeric feature value {text!r}", row=row) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite feature value {text!r}", row=row)
    return value


def _load_csv(path: Path) -> tuple[FeatureDataset, LabelMatrix | None]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", row=0) from None
        if len(header) < 2:
            raise ParseError("header needs an id column and at least one feature", row=0)
        label_start = None
        for col, name in enumerate(header[1:], start=1):
            if name.startswith("label_"):
                if label_start is None:
                    label_start = col
            elif label_start is not None:
                raise ParseError(
                    f"feature column {name!r} appears after label columns", row=0
                )
        n_features = (label_start or len(header)) - 1
        n_labels = len(header) - 1 - n_features
        if n_features < 1:
            raise ParseError("no feature columns before the label block", row=0)

        ids: list[str] = []
        feats: list[list[float]] = []
        labels: list[list[int]] = []
        seen: set[str] = set()
        for row_no, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} columns, found {len(row)}", row=row_no
                )
            item_id = row[0]
            if item_id in seen:
                raise IntegrityError(f"duplicate item_id {item_id!r} at row {row_no}")
            seen.add(item_id)
            ids.append(item_id)
            feats.append([_parse_float(v, row_no) for v in row[1 : 1 + n_features]])
            if n_labels:
                lab_row = []
                for v in row[1 + n_features :]:
                    if v not in ("0", "1"):
                        raise ParseError(f"label value {v!r} is not 0 or 1", row=row_no)
                    lab_row.append(int(v))
                labels.append(lab_row)
    if not ids:
        raise ParseError("file contains a header but no data rows", row=1)
    ds = FeatureDataset(item_ids=tuple(ids), features=np.asarray(feats))
    lm = LabelMatrix(labels=np.asarray(labels, dtype=np.uint8)) if n_labels else None
    return ds, lm


def _load_binary(path: Path) -> tuple[FeatureDataset, LabelMatrix | None]:
    raw = path.read_bytes()
    off = 0

    def take(size: int) -> bytes:
        nonlocal off
        if off + size > len(raw):
            raise ParseError("truncated binary dataset file")
        chunk = raw[off : off + size]
        off += size
        return chunk

    if take(4) != _BINARY_MAGIC:
        raise ParseError("bad magic; not a dataset file")
    (version,) = struct.unpack("<I", take(4))
    if version != _BINARY_VERSION:
        raise ParseError(f"unsupported dataset version {version}")
    n, m, c = struct.unpack("<QQQ", take(24))
    ids = []
    for _ in range(n):
        (length,) = struct.unpack("<I", take(4))
        ids.append(take(length).decode("utf-8"))
    feats = np.frombuffer(take(8 * n * m), dtype="<f8").reshape(n, m).copy()
    lm = None
    if c:
        labels = np.frombuffer(take(n * c), dtype=np.uint8).reshape(n, c).copy()
        lm = LabelMatrix(labels=labels)
    ds = FeatureDataset(item_ids=tuple(ids), features=feats)
    return ds, lm


def load_dataset(
    path: str | Path, format: str = "csv"
) -> tuple[FeatureDataset, LabelMatrix | None]:
    """Load a dataset (and labels, when present) from ``path``."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"no such file: {path}")
    if format == "csv":
        return _load_csv(path)
    if format == "binary":
        return _load_binary(path)
    raise ValidationError(f"unknown format {format!r}")


def save_dataset(
    ds: FeatureDataset,
    path: str | Path,
    format: str = "binary",
    labels: LabelMatrix | None = None,
) -> None:
    """Write a dataset to disk; binary round-trips features bit-exactly."""
    path = Path(path)
    if labels is not None and labels.n != ds.n:
        raise IntegrityError("label row count does not match dataset")
    if format == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            header = ["item_id"] + [f"f{j}" for j in range(ds.m)]
            if labels is not None:
                header += [f"label_{c}" for c in range(labels.n_classes)]
            writer.writerow(header)
            for i, item_id in enumerate(ds.item_ids):
                row = [item_id] + [repr(float(v)) for v in ds.features[i]]
                if labels is not None:
                    row += [str(int(v)) for v in labels.labels[i]]
                writer.writerow(row)
    elif format == "binary":
        c = labels.n_classes if labels is not None else 0
        parts = [
            _BINARY_MAGIC,
            struct.pack("<I", _BINARY_VERSION),
            struct.pack("<QQQ", ds.n, ds.m, c),
        ]
        for item_id in ds.item_ids:
            encoded = item_id.encode("utf-8")
            parts.append(struct.pack("<I", len(encoded)))
            parts.append(encoded)
        parts.append(np.ascontiguousarray(ds.features, dtype="<f8").tobytes())
        if labels is not None:
            parts.append(np.ascontiguousarray(labels.labels, dtype=np.uint8).tobytes())
        path.write_bytes(b"".join(parts))
    else:
        raise ValidationError(f"unknown format {format!r}")


def normalize_features(ds: FeatureDataset, mode: str) -> FeatureDataset:
    """Return a normalized copy: 'zscore' per column or 'unit' per row.

    Never applied implicitly anywhere in the library; callers opt in.
    """
    feats = np.array(ds.features, dtype=np.float64)
    if mode == "zscore":
        mean = feats.mean(axis=0)
        std = feats.std(axis=0)
        std[std == 0] = 1.0
        feats = (feats - mean) / std
    elif mode == "unit":
        norms = np.linalg.norm(feats, axis=1)
        norms[norms == 0] = 1.0
        feats = feats / norms[:, None]
    elif mode != "none":
        raise ValidationError(f"unknown normalization mode {mode!r}")
    return FeatureDataset(item_ids=ds.item_ids, features=feats)


def dataset_fingerprint(path: str | Path) -> str:
    """Content hash of a dataset file, used to pin models to their data."""
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
