"""Oversampling: fuzzy rings around minority points, SMOTE, and their composition."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.spatial import cKDTree

from .dataset import DataError, Dataset, class_counts, minority_class

__all__ = [
    "FuzzyConfig",
    "SmoteConfig",
    "ring_copies",
    "fuzzy_sample",
    "smote",
    "preprocess_ghost",
]


@dataclass(frozen=True)
class FuzzyConfig:
    delta_r: float = 0.01

    def __post_init__(self):
        if not self.delta_r > 0:
            raise ValueError(f"delta_r must be positive, got {self.delta_r}")


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    interpolation_lambda: float = 0.5

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError(f"k_neighbors must be >= 1, got {self.k_neighbors}")
        if not 0.0 < self.interpolation_lambda <= 1.0:
            raise ValueError(
                f"interpolation_lambda must lie in (0, 1], got {self.interpolation_lambda}"
            )


def ring_copies(n_total: int, n_minority: int) -> list[int]:
    """Copies per ring ``i = 0, 1, ...`` for a minority fraction ``n_minority / n_total``.

    Ring ``i`` gets ``floor((1/n) / 2**i)`` copies and exists while that
    quotient is at least 1. Exact rational arithmetic keeps e.g. 1/0.1 from
    landing a hair under 10.
    """
    if n_minority < 1 or n_total < n_minority:
        raise ValueError("need 1 <= n_minority <= n_total")
    inv_n = Fraction(n_total, n_minority)
    copies = []
    i = 0
    while inv_n / 2**i >= 1:
        copies.append(int(inv_n / 2**i))
        i += 1
    return copies


def fuzzy_sample(d: Dataset, cfg: FuzzyConfig = FuzzyConfig()) -> Dataset:
    """Append concentric offset copies of every minority row.

    Ring 0 appends plain copies of ``x``; ring ``i >= 1`` appends its copy
    count of both ``x + i*delta_r`` and ``x - i*delta_r`` (the offset is added
    to every feature). Original rows come first, then each minority row's
    rings in row order.
    """
    c0 = minority_class(d)
    minority = d.features[d.labels == c0]
    copies = ring_copies(len(d), minority.shape[0])

    blocks = []
    for x in minority:
        for i, reps in enumerate(copies):
            if i == 0:
                blocks.append(np.repeat(x[None, :], reps, axis=0))
            else:
                offset = i * cfg.delta_r
                pair = np.repeat(np.stack([x + offset, x - offset]), reps, axis=0)
                blocks.append(pair)
    added = np.concatenate(blocks, axis=0)
    X = np.concatenate([d.features, added], axis=0)
    y = np.concatenate([d.labels, np.full(added.shape[0], c0, dtype=np.int64)])
    return d.with_rows(X, y)


def _nearest_neighbors(points: np.ndarray, k: int) -> np.ndarray:
    """Indices of each row's ``k`` nearest other rows (Euclidean)."""
    _, idx = cKDTree(points).query(points, k=k + 1)
    idx = np.atleast_2d(idx)
    out = np.empty((points.shape[0], k), dtype=np.int64)
    for row, cand in enumerate(idx):
        # duplicates may push the row itself out of first place
        others = cand[cand != row]
        out[row] = others[:k]
    return out


def smote(d: Dataset, cfg: SmoteConfig = SmoteConfig(), seed: int = 0) -> Dataset:
    """Balance the classes by interpolating between minority neighbours.

    Each synthetic row is ``x + lam * (x_nb - x)`` for a uniformly drawn
    minority row ``x`` and one of its ``k`` nearest minority neighbours.
    """
    n0, n1 = class_counts(d)
    deficit = abs(n0 - n1)
    if deficit == 0:
        return d
    c0 = minority_class(d)
    minority = d.features[d.labels == c0]
    m = minority.shape[0]
    if m < 2:
        raise DataError(f"SMOTE needs at least 2 minority rows, got {m}")
    k = min(cfg.k_neighbors, m - 1)
    neighbors = _nearest_neighbors(minority, k)

    rng = np.random.default_rng(seed)
    base = rng.integers(0, m, size=deficit)
    pick = neighbors[base, rng.integers(0, k, size=deficit)]
    lam = cfg.interpolation_lambda
    synthetic = minority[base] + lam * (minority[pick] - minority[base])

    X = np.concatenate([d.features, synthetic], axis=0)
    y = np.concatenate([d.labels, np.full(deficit, c0, dtype=np.int64)])
    return d.with_rows(X, y)


def preprocess_ghost(
    train: Dataset,
    two_sample: bool = False,
    fuzzy: FuzzyConfig = FuzzyConfig(),
    sm: SmoteConfig = SmoteConfig(),
    seed: int = 0,
) -> Dataset:
    """Fuzzy sampling (twice when ``two_sample``) followed by SMOTE.

    The imbalance ratio and minority class are recomputed before each fuzzy
    pass, so the second pass targets the class the first one left behind.
    """
    out = fuzzy_sample(train, fuzzy)
    if two_sample:
        out = fuzzy_sample(out, fuzzy)
    return smote(out, sm, seed)
