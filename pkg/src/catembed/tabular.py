"""Tabular data model: schema, CSV ingestion, splits, target scaling and MAPE.

Category codes are 0-based and dense. Value dictionaries are built from the
sorted raw labels of the whole file so that every split shares one index
space.
"""
from __future__ import annotations

import csv
import datetime as _dt
import json
import os
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

CACHE_FORMAT_VERSION = 1

# Order and default embedding widths of the Rossmann feature set.
DEFAULT_EMBEDDING_DIMS = {
    "store": 10,
    "day_of_week": 6,
    "day": 10,
    "month": 6,
    "year": 2,
    "promo": 1,
    "state": 6,
}

DEFAULT_COLUMN_MAP = {
    "store": "Store",
    "date": "Date",
    "sales": "Sales",
    "promo": "Promo",
    "state": "State",
}


class SchemaError(ValueError):
    """A required column is missing or the schema is inconsistent."""


class RowError(ValueError):
    """A single CSV row could not be parsed."""

    def __init__(self, row_number: int, message: str):
        super().__init__(f"row {row_number}: {message}")
        self.row_number = row_number


class EmptyDatasetError(ValueError):
    pass


def clip_embedding_dim(dim: int, cardinality: int) -> int:
    """Clamp an embedding width into ``[1, cardinality - 1]``."""
    if cardinality < 2:
        return 1
    return int(min(max(dim, 1), cardinality - 1))


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str  # "categorical" or "binary"
    cardinality: int
    embedding_dim: int

    def __post_init__(self):
        if self.kind not in ("categorical", "binary"):
            raise SchemaError(f"unknown feature kind {self.kind!r}")
        if self.cardinality < 1:
            raise SchemaError(f"{self.name}: cardinality must be positive")
        if self.embedding_dim < 1:
            raise SchemaError(f"{self.name}: embedding_dim must be positive")
        if self.cardinality >= 2 and self.embedding_dim > self.cardinality - 1:
            raise SchemaError(
                f"{self.name}: embedding_dim {self.embedding_dim} exceeds "
                f"cardinality - 1 = {self.cardinality - 1}"
            )


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered categorical features plus their raw-label dictionaries.

    ``labels[i][a]`` is the raw label of category ``a`` of feature ``i``.
    """

    features: tuple[FeatureSpec, ...]
    labels: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if len(self.features) != len(self.labels):
            raise SchemaError("one label list per feature is required")
        for spec, labs in zip(self.features, self.labels):
            if len(labs) != spec.cardinality:
                raise SchemaError(
                    f"{spec.name}: {len(labs)} labels for cardinality {spec.cardinality}"
                )
            if len(set(labs)) != len(labs):
                raise SchemaError(f"{spec.name}: duplicate labels")

    @classmethod
    def from_cardinalities(cls, names, cardinalities, embedding_dims=None,
                           kinds=None) -> "FeatureSchema":
        """Schema with labels ``"0" .. "m-1"``; handy for synthetic data."""
        names = list(names)
        if embedding_dims is None:
            embedding_dims = [DEFAULT_EMBEDDING_DIMS.get(n, 4) for n in names]
        if kinds is None:
            kinds = ["binary" if m == 2 else "categorical" for m in cardinalities]
        feats = tuple(
            FeatureSpec(n, k, int(m), clip_embedding_dim(int(d), int(m)))
            for n, k, m, d in zip(names, kinds, cardinalities, embedding_dims)
        )
        labels = tuple(tuple(str(a) for a in range(int(m))) for m in cardinalities)
        return cls(feats, labels)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    @property
    def cardinalities(self) -> list[int]:
        return [f.cardinality for f in self.features]

    @property
    def embedding_dims(self) -> list[int]:
        return [f.embedding_dim for f in self.features]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaError(f"no feature named {name!r}") from None

    def encode(self, feature: int, label) -> int:
        try:
            return self.labels[feature].index(str(label))
        except ValueError:
            raise KeyError(
                f"unseen label {label!r} for feature {self.features[feature].name}"
            ) from None

    def with_embedding_dims(self, dims: Mapping[str, int]) -> "FeatureSchema":
        feats = tuple(
            FeatureSpec(f.name, f.kind, f.cardinality,
                        clip_embedding_dim(dims.get(f.name, f.embedding_dim), f.cardinality))
            for f in self.features
        )
        return FeatureSchema(feats, self.labels)

    def to_dict(self) -> dict:
        return {
            "features": [
                {"name": f.name, "kind": f.kind, "cardinality": f.cardinality,
                 "embedding_dim": f.embedding_dim}
                for f in self.features
            ],
            "labels": [list(l) for l in self.labels],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSchema":
        feats = tuple(FeatureSpec(**f) for f in d["features"])
        return cls(feats, tuple(tuple(l) for l in d["labels"]))


@dataclass(frozen=True)
class Sample:
    x: np.ndarray
    y: float


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable table of integer-coded rows, positive targets and dates."""

    schema: FeatureSchema
    X: np.ndarray
    y: np.ndarray
    dates: np.ndarray | None = None

    def __post_init__(self):
        X = np.array(self.X, dtype=np.int64, copy=True)
        y = np.array(self.y, dtype=np.float64, copy=True)
        if X.ndim != 2 or X.shape[1] != len(self.schema.features):
            raise SchemaError(
                f"X must have shape (n, {len(self.schema.features)}), got {X.shape}"
            )
        if y.shape != (X.shape[0],):
            raise SchemaError("y must be a vector with one entry per row")
        card = np.asarray(self.schema.cardinalities)
        if X.size and (np.any(X < 0) or np.any(X >= card)):
            bad = np.argwhere((X < 0) | (X >= card))[0]
            raise SchemaError(
                f"row {bad[0]}: code {X[bad[0], bad[1]]} out of range for "
                f"feature {self.schema.features[bad[1]].name}"
            )
        if np.any(~(y > 0)):
            raise SchemaError("targets must be strictly positive")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.dates is not None:
            dates = np.array(self.dates, dtype="datetime64[D]", copy=True)
            if dates.shape != y.shape:
                raise SchemaError("one date per row is required")
            dates.setflags(write=False)
            object.__setattr__(self, "dates", dates)

    def __len__(self) -> int:
        return self.X.shape[0]

    def __iter__(self) -> Iterator[Sample]:
        for i in range(len(self)):
            yield Sample(self.X[i], float(self.y[i]))

    def take(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        dates = None if self.dates is None else self.dates[idx]
        return Dataset(self.schema, self.X[idx], self.y[idx], dates)


def _parse_date(text: str, row: int) -> _dt.date:
    try:
        return _dt.date.fromisoformat(text.strip())
    except ValueError:
        raise RowError(row, f"unparseable date {text!r}") from None


def _parse_float(text: str, column: str, row: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise RowError(row, f"unparseable value {text!r} in column {column}") from None
    if not np.isfinite(v):
        raise RowError(row, f"non-finite value in column {column}")
    return v


def _sort_key(label: str):
    # numeric labels sort numerically, everything else lexically after them
    try:
        return (0, float(label), label)
    except ValueError:
        return (1, 0.0, label)


def ingest_csv(path, column_map: Mapping[str, str | None] | None = None,
               embedding_dims: Mapping[str, int] | None = None) -> Dataset:
    """Read a Rossmann-shaped CSV into a :class:`Dataset`.

    ``column_map`` maps the roles ``store``, ``date``, ``sales``, ``promo`` and
    ``state`` to header names; a role mapped to ``None`` is skipped (``state``
    is optional, the others are required). Day of week, day, month and year
    are derived from the date. Rows with ``Sales <= 0`` are dropped.
    """
    cmap = dict(DEFAULT_COLUMN_MAP)
    if column_map:
        cmap.update(column_map)
    for role in ("store", "date", "sales", "promo"):
        if not cmap.get(role):
            raise SchemaError(f"column map has no entry for required role {role!r}")
    dims = dict(DEFAULT_EMBEDDING_DIMS)
    if embedding_dims:
        dims.update(embedding_dims)

    raw = {k: [] for k in ("store", "day_of_week", "day", "month", "year", "promo", "state")}
    sales, dates = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: missing header row")
        header = [h.strip() for h in reader.fieldnames]
        reader.fieldnames = header
        for role, col in cmap.items():
            if col and col not in header:
                raise SchemaError(f"missing column {col!r} (role {role})")
        use_state = bool(cmap.get("state"))
        # header is line 1, first data row is line 2
        for line_no, rec in enumerate(reader, start=2):
            s = _parse_float(rec[cmap["sales"]], cmap["sales"], line_no)
            d = _parse_date(rec[cmap["date"]], line_no)
            vals = {
                "store": rec[cmap["store"]],
                "promo": rec[cmap["promo"]],
                "state": rec[cmap["state"]] if use_state else None,
            }
            for role, v in vals.items():
                if role == "state" and not use_state:
                    continue
                if v is None or v.strip() == "":
                    raise RowError(line_no, f"missing value for {role}")
            if s <= 0:
                continue
            raw["store"].append(vals["store"].strip())
            raw["day_of_week"].append(str(d.isoweekday()))
            raw["day"].append(str(d.day))
            raw["month"].append(str(d.month))
            raw["year"].append(str(d.year))
            raw["promo"].append(vals["promo"].strip())
            if use_state:
                raw["state"].append(vals["state"].strip())
            sales.append(s)
            dates.append(d)

    if not sales:
        raise EmptyDatasetError(f"{path}: no rows with positive sales")

    names = ["store", "day_of_week", "day", "month", "year", "promo"]
    if cmap.get("state"):
        names.append("state")
    return dataset_from_labels({n: raw[n] for n in names}, sales, dates, dims)


def dataset_from_labels(columns: Mapping[str, Sequence[str]], sales, dates=None,
                        embedding_dims: Mapping[str, int] | None = None) -> Dataset:
    """Dataset from raw label columns; dictionaries are the sorted distinct labels."""
    dims = dict(DEFAULT_EMBEDDING_DIMS)
    if embedding_dims:
        dims.update(embedding_dims)
    feats, labels, codes = [], [], []
    for name, values in columns.items():
        labs = sorted(set(values), key=_sort_key)
        lookup = {l: i for i, l in enumerate(labs)}
        codes.append(np.fromiter((lookup[v] for v in values), dtype=np.int64,
                                 count=len(values)))
        m = len(labs)
        kind = "binary" if name == "promo" else "categorical"
        feats.append(FeatureSpec(name, kind, m, clip_embedding_dim(dims.get(name, 4), m)))
        labels.append(tuple(labs))
    schema = FeatureSchema(tuple(feats), tuple(labels))
    if dates is not None:
        dates = np.asarray(dates, dtype="datetime64[D]")
    return Dataset(schema, np.column_stack(codes), np.asarray(sales, dtype=np.float64), dates)


def save_dataset(d: Dataset, path) -> None:
    """Write a columnar ``.npz`` cache with a versioned header."""
    header = {"format": "catembed-dataset", "version": CACHE_FORMAT_VERSION,
              "schema": d.schema.to_dict()}
    arrays = {"X": np.asarray(d.X), "y": np.asarray(d.y)}
    if d.dates is not None:
        arrays["dates"] = d.dates.astype("datetime64[D]").astype(np.int64)
    with open(path, "wb") as fh:
        np.savez(fh, header=np.array(json.dumps(header)), **arrays)


def load_dataset(path) -> Dataset:
    with np.load(path, allow_pickle=False) as z:
        header = json.loads(str(z["header"]))
        if header.get("format") != "catembed-dataset":
            raise SchemaError(f"{path}: not a dataset cache")
        if header.get("version") != CACHE_FORMAT_VERSION:
            raise SchemaError(f"{path}: unsupported cache version {header.get('version')}")
        dates = z["dates"].astype("datetime64[D]") if "dates" in z.files else None
        return Dataset(FeatureSchema.from_dict(header["schema"]), z["X"], z["y"], dates)


def load_any(path) -> Dataset:
    """Load a dataset from a cache (``.npz``) or a CSV file."""
    if os.fspath(path).endswith(".npz"):
        return load_dataset(path)
    return ingest_csv(path)


def split(d: Dataset, mode: str = "shuffled", test_fraction: float = 0.1,
          seed: int = 0) -> tuple[Dataset, Dataset]:
    """Train/test partition.

    ``temporal`` keeps whole days together: the first ``1 - test_fraction`` of
    the distinct days train, the rest test. ``shuffled`` applies a seeded
    permutation and cuts ``round(test_fraction * n)`` rows off for testing.
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie in (0, 1)")
    n = len(d)
    if n < 2:
        raise ValueError("dataset too small to split (need at least 2 rows)")
    if mode == "temporal":
        if d.dates is None:
            raise ValueError("temporal split needs dates")
        days = np.unique(d.dates)
        if len(days) < 2:
            raise ValueError("temporal split needs at least 2 distinct days")
        n_train_days = int(round((1 - test_fraction) * len(days)))
        n_train_days = min(max(n_train_days, 1), len(days) - 1)
        cutoff = days[n_train_days]
        train_idx = np.flatnonzero(d.dates < cutoff)
        test_idx = np.flatnonzero(d.dates >= cutoff)
    elif mode == "shuffled":
        rng = np.random.default_rng(seed)
        perm = rng.permutation(n)
        n_test = int(round(test_fraction * n))
        n_test = min(max(n_test, 1), n - 1)
        test_idx, train_idx = perm[:n_test], perm[n_test:]
    else:
        raise ValueError(f"unknown split mode {mode!r}")
    return d.take(train_idx), d.take(test_idx)


def sparsify(train: Dataset, n: int, seed: int = 0) -> Dataset:
    """Seeded sample of ``n`` distinct rows (no replacement)."""
    if n > len(train):
        raise ValueError(f"cannot sample {n} rows from {len(train)}")
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    return train.take(rng.choice(len(train), size=n, replace=False))


@dataclass(frozen=True)
class TargetTransform:
    """``log(sales) / log(sale_max)``, with ``sale_max`` from the training rows."""

    sale_max: float

    def __post_init__(self):
        if not self.sale_max > 1:
            raise ValueError("sale_max must exceed 1")

    @classmethod
    def fit(cls, sales) -> "TargetTransform":
        return cls(float(np.max(sales)))

    @property
    def log_max(self) -> float:
        return float(np.log(self.sale_max))

    def transform(self, sales):
        s = np.asarray(sales, dtype=np.float64)
        if np.any(~(s > 0)):
            raise ValueError("sales must be strictly positive")
        out = np.log(s) / self.log_max
        return float(out) if out.ndim == 0 else out

    def inverse_transform(self, v):
        out = np.exp(np.asarray(v, dtype=np.float64) * self.log_max)
        return float(out) if out.ndim == 0 else out


def transform_target(sales, t: TargetTransform):
    return t.transform(sales)


def inverse_transform(v, t: TargetTransform):
    return t.inverse_transform(v)


def mape(pred: Sequence[float], actual: Sequence[float]) -> float:
    """Mean absolute percentage error, ``mean(|actual - pred| / actual)``."""
    pred = np.asarray(pred, dtype=np.float64).ravel()
    actual = np.asarray(actual, dtype=np.float64).ravel()
    if pred.shape != actual.shape:
        raise ValueError(f"length mismatch: {pred.size} predictions, {actual.size} actuals")
    if actual.size == 0:
        raise ValueError("mape of an empty sequence")
    if np.any(~(actual > 0)):
        raise ValueError("actual values must be strictly positive")
    return float(np.mean(np.abs(actual - pred) / actual))


def one_hot(value: int, cardinality: int) -> np.ndarray:
    if not 0 <= value < cardinality:
        raise ValueError(f"value {value} out of range [0, {cardinality})")
    v = np.zeros(cardinality)
    v[value] = 1.0
    return v


def one_hot_matrix(X, cardinalities) -> np.ndarray:
    """Concatenated one-hot encoding of an integer code matrix."""
    X = np.asarray(X, dtype=np.int64)
    card = np.asarray(cardinalities, dtype=np.int64)
    if X.ndim != 2 or X.shape[1] != card.size:
        raise ValueError("X width must match the number of cardinalities")
    if X.size and (np.any(X < 0) or np.any(X >= card)):
        raise ValueError("category code out of range")
    offsets = np.concatenate([[0], np.cumsum(card)[:-1]])
    out = np.zeros((X.shape[0], int(card.sum())))
    rows = np.repeat(np.arange(X.shape[0]), card.size)
    out[rows, (X + offsets).ravel()] = 1.0
    return out


@dataclass
class EvalReport:
    method: str
    mape: float
    with_embeddings: bool
    split_mode: str
    seed: int
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.mape >= 0:
            raise ValueError("mape must be nonnegative")
