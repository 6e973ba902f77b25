"""Tabular datasets: CSV ingestion, stratified splits, scaling and leakage audits."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

__all__ = [
    "Dataset",
    "DataError",
    "SplitPair",
    "ScalerParams",
    "load_csv",
    "save_csv",
    "split",
    "class_counts",
    "minority_class",
    "imbalance_ratio",
    "minmax_fit_transform",
    "leakage_zero_count",
    "leakage_zero_fraction",
]

LABEL_COLUMN = "label"


class DataError(ValueError):
    """Raised when input data violates the dataset contract."""


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64, copy=True)
        y = np.array(self.labels, copy=True).ravel()
        if X.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {X.shape}")
        if X.shape[1] < 1:
            raise DataError("dataset needs at least one feature column")
        if X.shape[0] < 2:
            raise DataError(f"dataset needs at least two rows, got {X.shape[0]}")
        if y.shape[0] != X.shape[0]:
            raise DataError(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
        if not np.all(np.isfinite(X)):
            raise DataError("features contain NaN or Inf")
        if not np.all((y == 0) | (y == 1)):
            raise DataError("labels must be 0 or 1")
        names = tuple(self.feature_names) or tuple(f"f{i + 1}" for i in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise DataError(f"{len(names)} feature names for {X.shape[1]} columns")
        X.flags.writeable = False
        y = y.astype(np.int64)
        y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", names)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, index) -> "Dataset":
        index = np.asarray(index)
        return Dataset(self.features[index], self.labels[index], self.feature_names)

    def with_rows(self, features: np.ndarray, labels: np.ndarray) -> "Dataset":
        """Same columns, different rows."""
        return Dataset(features, labels, self.feature_names)


@dataclass(frozen=True, eq=False)
class SplitPair:
    train: Dataset
    test: Dataset
    seed: int
    test_fraction: float
    train_index: np.ndarray = field(repr=False)
    test_index: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class ScalerParams:
    minimum: np.ndarray
    maximum: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        span = self.maximum - self.minimum
        safe = np.where(span > 0, span, 1.0)
        out = (X - self.minimum) / safe
        # constant columns collapse to 0
        out[..., span <= 0] = 0.0
        return out

    def inverse_transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return X * (self.maximum - self.minimum) + self.minimum

    def apply(self, d: Dataset) -> Dataset:
        if d.n_features != self.minimum.shape[0]:
            raise DataError(
                f"scaler fit on {self.minimum.shape[0]} features, got {d.n_features}"
            )
        return d.with_rows(self.transform(d.features), d.labels)


def load_csv(path: str | Path) -> Dataset:
    """Read a feature CSV whose last column is the 0/1 ``label``.

    Errors name the offending 1-based data row (header excluded) and column.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"data file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if len(header) < 2 or header[-1] != LABEL_COLUMN:
            raise DataError(f"{path}: last column must be named '{LABEL_COLUMN}'")
        rows, labels = [], []
        for rownum, record in enumerate(reader, start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != len(header):
                raise DataError(
                    f"{path}: row {rownum} has {len(record)} cells, expected {len(header)}"
                )
            values = []
            for col, cell in zip(header[:-1], record[:-1]):
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: row {rownum}, column '{col}': non-numeric value {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DataError(
                        f"{path}: row {rownum}, column '{col}': non-finite value {cell!r}"
                    )
                values.append(v)
            raw_label = record[-1].strip()
            try:
                label = float(raw_label)
            except ValueError:
                label = None
            if label not in (0.0, 1.0):
                raise DataError(
                    f"{path}: row {rownum}: label {raw_label!r} is not 0 or 1"
                )
            rows.append(values)
            labels.append(int(label))
    if len(rows) < 2:
        raise DataError(f"{path}: need at least 2 data rows, got {len(rows)}")
    return Dataset(np.array(rows), np.array(labels), tuple(header[:-1]))


def save_csv(d: Dataset, path: str | Path) -> None:
    """Write ``d`` in the ingestion format. ``repr`` keeps floats round-trippable."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*d.feature_names, LABEL_COLUMN])
        for row, label in zip(d.features, d.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def class_counts(d: Dataset) -> tuple[int, int]:
    n1 = int(d.labels.sum())
    return len(d) - n1, n1


def minority_class(d: Dataset) -> int:
    """Label of the less frequent class; class 0 on a tie."""
    n0, n1 = class_counts(d)
    if n0 == 0 or n1 == 0:
        raise DataError("both classes must be present")
    return 1 if n1 < n0 else 0


def imbalance_ratio(d: Dataset) -> float:
    """Fraction of rows in the minority class, in (0, 0.5]."""
    n0, n1 = class_counts(d)
    if n0 == 0 or n1 == 0:
        raise DataError("imbalance ratio undefined for a single-class dataset")
    return min(n0, n1) / len(d)


def split(d: Dataset, test_fraction: float, seed: int) -> SplitPair:
    """Stratified shuffle split.

    Each class contributes ``round(test_fraction * class_count)`` rows to the
    test side (halves round up), so both sides keep the parent's class mix to
    within one row.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for cls in (0, 1):
        idx = np.flatnonzero(d.labels == cls)
        if idx.size == 0:
            raise DataError(f"class {cls} is absent; cannot stratify")
        idx = rng.permutation(idx)
        n_test = int(math.floor(test_fraction * idx.size + 0.5))
        test_idx.append(idx[:n_test])
        train_idx.append(idx[n_test:])
    train_index = np.sort(np.concatenate(train_idx))
    test_index = np.sort(np.concatenate(test_idx))
    if train_index.size < 2 or test_index.size < 1:
        raise DataError(
            f"split leaves {train_index.size} train / {test_index.size} test rows"
        )
    # A one-row test side cannot be a Dataset; the contract needs two rows.
    if test_index.size < 2:
        raise DataError("split would leave fewer than two test rows")
    return SplitPair(
        train=d.subset(train_index),
        test=d.subset(test_index),
        seed=seed,
        test_fraction=test_fraction,
        train_index=train_index,
        test_index=test_index,
    )


def minmax_fit_transform(d: Dataset) -> tuple[Dataset, ScalerParams]:
    params = ScalerParams(d.features.min(axis=0), d.features.max(axis=0))
    return params.apply(d), params


def leakage_zero_count(train: Dataset, test: Dataset, chunk: int = 2048) -> int:
    """Number of (train, test) row pairs at Euclidean distance exactly 0."""
    if train.n_features != test.n_features:
        raise DataError(
            f"feature mismatch: train has {train.n_features}, test has {test.n_features}"
        )
    zeros = 0
    for start in range(0, len(train), chunk):
        dist = cdist(train.features[start:start + chunk], test.features)
        zeros += int(np.count_nonzero(dist == 0.0))
    return zeros


def leakage_zero_fraction(train: Dataset, test: Dataset) -> float:
    """Percentage of the train x test distance matrix that is exactly zero."""
    zeros = leakage_zero_count(train, test)
    return 100.0 * zeros / (len(train) * len(test))
