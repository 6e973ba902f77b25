"""DODGE-style tabu search over network and preprocessor settings."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = [
    "PREPROCESSORS",
    "ConfigSpace",
    "Config",
    "TunerResult",
    "epsilon_dominated",
    "dodge",
    "best_so_far",
    "write_history_csv",
]

log = logging.getLogger(__name__)

PREPROCESSORS = ("none", "minmax", "standardize", "robust-quantile", "max-abs")
NUMERIC_DIMS = ("n_layers", "units", "epochs", "learning_rate")


@dataclass(frozen=True)
class ConfigSpace:
    preprocessors: tuple[str, ...] = PREPROCESSORS
    n_layers: tuple[int, int] = (1, 5)
    units: tuple[int, int] = (2, 64)
    epochs: tuple[int, int] = (10, 100)
    learning_rate: tuple[float, float] = (1e-4, 1e-1)

    def __post_init__(self):
        if not self.preprocessors:
            raise ValueError("need at least one preprocessor")
        unknown = set(self.preprocessors) - set(PREPROCESSORS)
        if unknown:
            raise ValueError(f"unknown preprocessors: {sorted(unknown)}")
        for name in ("n_layers", "units", "epochs"):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi:
                raise ValueError(f"{name} range {lo}..{hi} is empty or non-positive")
        lo, hi = self.learning_rate
        if not 0 < lo <= hi:
            raise ValueError(f"learning_rate range {lo}..{hi} is invalid")

    def draw(self, rng: np.random.Generator, dim: str):
        if dim == "preprocessor":
            return self.preprocessors[int(rng.integers(len(self.preprocessors)))]
        lo, hi = getattr(self, dim)
        if dim == "learning_rate":
            return float(10 ** rng.uniform(math.log10(lo), math.log10(hi)))
        return int(rng.integers(lo, hi + 1))

    def sample(self, rng: np.random.Generator) -> "Config":
        return Config(
            preprocessor=self.draw(rng, "preprocessor"),
            n_layers=self.draw(rng, "n_layers"),
            units=self.draw(rng, "units"),
            epochs=self.draw(rng, "epochs"),
            learning_rate=self.draw(rng, "learning_rate"),
        )

    def contains(self, cfg: "Config") -> bool:
        if cfg.preprocessor not in self.preprocessors:
            return False
        for dim in NUMERIC_DIMS:
            lo, hi = getattr(self, dim)
            if not lo <= getattr(cfg, dim) <= hi:
                return False
        return True


@dataclass
class Config:
    preprocessor: str
    n_layers: int
    units: int
    epochs: int
    learning_rate: float
    weight: int = field(default=0, compare=False)

    @property
    def hidden(self) -> list[int]:
        return [self.units] * self.n_layers


@dataclass
class TunerResult:
    best_config: Config
    best_score: float
    history: list[tuple[Config, float]]
    dominated: list[bool]

    @property
    def scores(self) -> list[float]:
        return [score for _, score in self.history]


def epsilon_dominated(phi: float, seen, epsilon: float) -> bool:
    """True when some already-seen score lies strictly within ``epsilon`` of ``phi``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return any(abs(phi - s) < epsilon for s in seen)


def _mutate(space: ConfigSpace, parent: Config, rng: np.random.Generator) -> Config:
    # move one numeric setting halfway toward a fresh random draw
    dim = NUMERIC_DIMS[int(rng.integers(len(NUMERIC_DIMS)))]
    old, fresh = getattr(parent, dim), space.draw(rng, dim)
    if dim == "learning_rate":
        value = float(10 ** ((math.log10(old) + math.log10(fresh)) / 2))
        lo, hi = space.learning_rate
        value = min(max(value, lo), hi)
    else:
        value = int(math.floor((old + fresh) / 2 + 0.5))
    return replace(parent, weight=0, **{dim: value})


def dodge(
    space: ConfigSpace,
    objective: Callable[[Config], float],
    iterations: int = 30,
    epsilon: float = 0.2,
    seed: int = 0,
) -> TunerResult:
    """Tabu search driven by the epsilon-domination rule.

    Every evaluated config gets an integer weight. A score within ``epsilon``
    of an earlier one costs the new config and each matching earlier config
    one point; a fresh score earns the new config one point. The next
    candidate mutates the highest-weight config (earliest on ties), or is
    drawn uniformly once no weight is positive. An objective that raises or
    returns a non-finite value scores 0.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    rng = np.random.default_rng(seed)
    configs: list[Config] = []
    scores: list[float] = []
    dominated: list[bool] = []

    candidate = space.sample(rng)
    for it in range(iterations):
        try:
            phi = float(objective(candidate))
        except Exception as err:  # a failed config just scores zero
            log.warning("objective failed at iteration %d (%s): %s", it, candidate, err)
            phi = 0.0
        if not math.isfinite(phi):
            phi = 0.0

        matches = [j for j, s in enumerate(scores) if abs(phi - s) < epsilon]
        if matches:
            candidate.weight -= 1
            for j in matches:
                configs[j].weight -= 1
        else:
            candidate.weight += 1
        configs.append(candidate)
        scores.append(phi)
        dominated.append(bool(matches))

        if it + 1 == iterations:
            break
        top = max(range(len(configs)), key=lambda j: (configs[j].weight, -j))
        if configs[top].weight > 0:
            candidate = _mutate(space, configs[top], rng)
        else:
            candidate = space.sample(rng)

    best = int(np.argmax(scores))
    return TunerResult(configs[best], scores[best], list(zip(configs, scores)), dominated)


def best_so_far(scores) -> list[float]:
    return list(np.maximum.accumulate(np.asarray(scores, dtype=float)))


def write_history_csv(result: TunerResult, path: str | Path) -> None:
    names = [f.name for f in fields(Config)]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", *names, "score"])
        for i, (cfg, score) in enumerate(result.history):
            writer.writerow([i, *(getattr(cfg, n) for n in names), repr(score)])
