"""End-to-end GHOST runs: oversample, tune, refit, score, and retry with two passes."""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .dataset import Dataset, minmax_fit_transform, split
from .evalstats import METRICS, RunRecord, auc_score, classification_metrics
from .network import Network, TrainConfig, TrainingError, build_classifier, fit_arrays, predict_proba
from .sampling import FuzzyConfig, SmoteConfig, preprocess_ghost
from .tuner import Config, ConfigSpace, TunerResult, dodge

__all__ = [
    "GhostConfig",
    "GhostResult",
    "GhostError",
    "Preprocessor",
    "FittedModel",
    "fit_model",
    "validation_objective",
    "run_ghost",
    "RepeatResult",
    "RESULT_FIELDS",
    "run_repeat",
    "run_experiment",
    "write_results_csv",
    "read_results_csv",
]

log = logging.getLogger(__name__)


class GhostError(RuntimeError):
    pass


@dataclass(frozen=True)
class GhostConfig:
    tau: float = 0.5
    fuzzy: FuzzyConfig = field(default_factory=FuzzyConfig)
    smote: SmoteConfig = field(default_factory=SmoteConfig)
    space: ConfigSpace = field(default_factory=ConfigSpace)
    iterations: int = 30
    epsilon: float = 0.2
    seed: int = 0
    batch_size: int = 64
    metric: str = "auc"
    validation_fraction: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")
        if self.metric not in ("auc", "f1"):
            raise ValueError(f"tuning metric must be 'auc' or 'f1', got {self.metric!r}")


@dataclass
class GhostResult:
    theta_star: Config
    two_sample_used: bool
    metrics: RunRecord
    tuner_history: list[tuple[Config, float]]
    phi: float
    passes: int
    train_rows: int  # rows after oversampling


@dataclass(frozen=True)
class Preprocessor:
    """Column-wise affine transform ``(x - center) / scale`` chosen by name."""

    kind: str
    center: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, kind: str, X: np.ndarray) -> "Preprocessor":
        d = X.shape[1]
        if kind == "none":
            center, scale = np.zeros(d), np.ones(d)
        elif kind == "minmax":
            center, scale = X.min(axis=0), X.max(axis=0) - X.min(axis=0)
        elif kind == "standardize":
            center, scale = X.mean(axis=0), X.std(axis=0)
        elif kind == "robust-quantile":
            q1, med, q3 = np.percentile(X, [25, 50, 75], axis=0)
            center, scale = med, q3 - q1
        elif kind == "max-abs":
            center, scale = np.zeros(d), np.abs(X).max(axis=0)
        else:
            raise ValueError(f"unknown preprocessor {kind!r}")
        # degenerate columns pass through unscaled
        scale = np.where(scale > 0, scale, 1.0)
        return cls(kind, center, scale)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.center) / self.scale


@dataclass(frozen=True)
class FittedModel:
    preprocessor: Preprocessor
    network: Network
    history: list[float]

    def predict_proba(self, X) -> np.ndarray:
        return predict_proba(self.network, self.preprocessor.transform(np.asarray(X, float)))


def fit_model(d: Dataset, config: Config, batch_size: int = 64, seed: int = 0) -> FittedModel:
    """Fit the config's preprocessor and a ReLU classifier of its shape on ``d``."""
    prep = Preprocessor.fit(config.preprocessor, d.features)
    net = build_classifier(d.n_features, config.hidden, seed=seed)
    cfg = TrainConfig(
        epochs=config.epochs,
        learning_rate=config.learning_rate,
        batch_size=batch_size,
        loss="binary_cross_entropy",
        seed=seed,
    )
    trained, history = fit_arrays(net, prep.transform(d.features), d.labels, cfg)
    return FittedModel(prep, trained, history)


def validation_objective(pre: Dataset, cfg: GhostConfig) -> Callable[[Config], float]:
    """Score configs on a stratified hold-out of the oversampled training set.

    Returns a function mapping a config to AUC (or F1) in [0, 1].
    """
    holdout = split(pre, cfg.validation_fraction, cfg.seed)

    def objective(config: Config) -> float:
        model = fit_model(holdout.train, config, cfg.batch_size, cfg.seed)
        probs = model.predict_proba(holdout.test.features)
        if cfg.metric == "auc":
            return auc_score(probs, holdout.test.labels)
        return classification_metrics(probs, holdout.test.labels).f1 / 100.0

    return objective


ObjectiveFactory = Callable[[Dataset, GhostConfig], Callable[[Config], float]]


def _single_pass(train, test, cfg, two_sample, make_objective) -> GhostResult:
    scaled_train, scaler = minmax_fit_transform(train)
    scaled_test = scaler.apply(test)
    pre = preprocess_ghost(scaled_train, two_sample, cfg.fuzzy, cfg.smote, cfg.seed)
    tuned: TunerResult = dodge(
        cfg.space, make_objective(pre, cfg), cfg.iterations, cfg.epsilon, cfg.seed
    )
    try:
        model = fit_model(pre, tuned.best_config, cfg.batch_size, cfg.seed)
    except TrainingError as err:
        raise GhostError(
            f"final model diverged (seed {cfg.seed}, config {tuned.best_config}): {err}"
        ) from err
    probs = model.predict_proba(scaled_test.features)
    return GhostResult(
        theta_star=tuned.best_config,
        two_sample_used=two_sample,
        metrics=classification_metrics(probs, test.labels),
        tuner_history=tuned.history,
        phi=tuned.best_score,
        passes=1,
        train_rows=len(pre),
    )


def run_ghost(
    train: Dataset,
    test: Dataset,
    cfg: GhostConfig = GhostConfig(),
    make_objective: ObjectiveFactory | None = None,
) -> GhostResult:
    """Tune and evaluate one train/test split.

    Features are min-max scaled on the training rows, the training side is
    oversampled, DODGE picks a config, and a network refit on all oversampled
    rows is scored on the untouched test rows. If the tuned validation score
    falls below ``tau`` the whole pass is redone once with two fuzzy passes.

    ``make_objective(preprocessed_train, cfg)`` builds the tuning objective;
    it defaults to :func:`validation_objective`.
    """
    if train.n_features != test.n_features:
        raise ValueError(
            f"train has {train.n_features} features, test has {test.n_features}"
        )
    make_objective = make_objective or validation_objective
    first = _single_pass(train, test, cfg, False, make_objective)
    if first.phi >= cfg.tau:
        return first
    log.info("validation score %.3f below tau %.2f; retrying with two fuzzy passes",
             first.phi, cfg.tau)
    second = _single_pass(train, test, cfg, True, make_objective)
    second.passes = 2
    return second


@dataclass(frozen=True)
class RepeatResult:
    dataset_name: str
    repeat: int
    seed: int
    two_sample_used: bool
    metrics: RunRecord


RESULT_FIELDS = ("dataset_name", "repeat", "seed", "two_sample_used", *METRICS)


def run_repeat(d: Dataset, name: str, repeat: int, seed: int, cfg: GhostConfig,
               test_fraction: float = 0.3) -> RepeatResult:
    pair = split(d, test_fraction, seed)
    result = run_ghost(pair.train, pair.test, replace(cfg, seed=seed))
    return RepeatResult(name, repeat, seed, result.two_sample_used, result.metrics)


def _run_repeat_args(args):
    return run_repeat(*args)


def run_experiment(
    d: Dataset,
    name: str,
    cfg: GhostConfig = GhostConfig(),
    repeats: int = 20,
    base_seed: int = 0,
    test_fraction: float = 0.3,
    jobs: int = 1,
) -> list[RepeatResult]:
    """``repeats`` seeded split-and-run rounds; repeat ``i`` uses ``base_seed + i``.

    Results come back in repeat order whatever ``jobs`` is.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    tasks = [(d, name, i, base_seed + i, cfg, test_fraction) for i in range(repeats)]
    if jobs <= 1:
        return [run_repeat(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_repeat_args, tasks))


def _format_row(r: RepeatResult) -> list[str]:
    m = r.metrics
    return [r.dataset_name, str(r.repeat), str(r.seed), str(r.two_sample_used).lower(),
            *(f"{getattr(m, k):.1f}" for k in METRICS)]


def write_results_csv(rows, path: str | Path, append: bool = False) -> None:
    path = Path(path)
    fresh = not (append and path.exists())
    with path.open("w" if fresh else "a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if fresh:
            writer.writerow(RESULT_FIELDS)
        for r in rows:
            writer.writerow(_format_row(r))


def read_results_csv(path: str | Path) -> list[RepeatResult]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULT_FIELDS:
            raise ValueError(
                f"{path}: expected columns {','.join(RESULT_FIELDS)}, "
                f"got {','.join(reader.fieldnames or [])}"
            )
        out = []
        for row in reader:
            out.append(RepeatResult(
                row["dataset_name"],
                int(row["repeat"]),
                int(row["seed"]),
                row["two_sample_used"].strip().lower() == "true",
                RunRecord(*(float(row[k]) for k in METRICS)),
            ))
    return out
