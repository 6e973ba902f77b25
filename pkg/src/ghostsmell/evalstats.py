"""Classification metrics and Scott-Knott ranking with a Cliff's delta gate."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

__all__ = [
    "SMALL_EFFECT",
    "METRICS",
    "RunRecord",
    "Group",
    "RankTable",
    "classification_metrics",
    "auc_score",
    "cliffs_delta",
    "split_objective",
    "best_split",
    "scott_knott",
    "summarize_wtl",
    "compare_pair",
]

SMALL_EFFECT = 0.147
METRICS = ("precision", "recall", "f1", "auc")


@dataclass(frozen=True)
class RunRecord:
    """Test-set metrics in percent."""

    precision: float
    recall: float
    f1: float
    auc: float

    def as_dict(self) -> dict[str, float]:
        return {m: getattr(self, m) for m in METRICS}


@dataclass(frozen=True)
class Group:
    label: str
    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError(f"group {self.label!r} is empty")
        object.__setattr__(self, "values", values)

    @property
    def median(self) -> float:
        return float(np.median(self.values))


@dataclass(frozen=True)
class RankTable:
    ranks: dict[str, int]
    order: tuple[str, ...]  # labels from best to worst block

    def __getitem__(self, label: str) -> int:
        return self.ranks[label]


def auc_score(scores, labels) -> float:
    """Probability a positive outscores a negative, ties counting one half.

    Computed from average ranks, which equals the pairwise count exactly.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC is undefined unless both classes are present")
    ranks = rankdata(scores)
    wins = ranks[pos].sum() - n_pos * (n_pos + 1) / 2
    return float(wins / (n_pos * n_neg))


def classification_metrics(scores, labels, threshold: float = 0.5) -> RunRecord:
    """Precision, recall, F1 and AUC in percent; a score >= threshold predicts 1.

    Precision or recall with a zero denominator is reported as 0.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError(f"{scores.shape[0]} scores for {labels.shape[0]} labels")
    pred = scores >= threshold
    truth = labels == 1
    tp = int(np.sum(pred & truth))
    fp = int(np.sum(pred & ~truth))
    fn = int(np.sum(~pred & truth))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return RunRecord(
        100 * precision, 100 * recall, 100 * f1, 100 * auc_score(scores, labels)
    )


def cliffs_delta(a, b) -> float:
    """(#{x > y} - #{x < y}) / (|a| |b|) over all pairs, via sorted counts."""
    a = np.asarray(a, dtype=float)
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("Cliff's delta needs two nonempty samples")
    more = np.searchsorted(b, a, side="left").sum()
    less = (b.size - np.searchsorted(b, a, side="right")).sum()
    return float((int(more) - int(less)) / (a.size * b.size))


def _values(x) -> np.ndarray:
    return np.asarray(x.values if isinstance(x, Group) else x, dtype=float)


def split_objective(l, m, n) -> float:
    """Expected squared deviation of the two part means from the whole mean.

    ``m`` and ``n`` must partition ``l`` as multisets.
    """
    lv, mv, nv = _values(l), _values(m), _values(n)
    if not np.array_equal(np.sort(lv), np.sort(np.concatenate([mv, nv]))):
        raise ValueError("m and n do not partition l")
    mu = lv.mean()
    return float(
        mv.size / lv.size * (mv.mean() - mu) ** 2 + nv.size / lv.size * (nv.mean() - mu) ** 2
    )


def best_split(groups) -> tuple[int, float]:
    """Cut position (1..len-1) over already-ordered groups maximizing the split objective.

    Earliest position wins a tie.
    """
    if len(groups) < 2:
        raise ValueError("need at least two groups to split")
    parts = [_values(g) for g in groups]
    whole = np.concatenate(parts)
    best_pos, best_score = 0, -np.inf
    for pos in range(1, len(parts)):
        left = np.concatenate(parts[:pos])
        right = np.concatenate(parts[pos:])
        score = split_objective(whole, left, right)
        if score > best_score:
            best_pos, best_score = pos, score
    return best_pos, best_score


def scott_knott(
    groups, effect_threshold: float = SMALL_EFFECT, higher_is_better: bool = True
) -> RankTable:
    """Rank groups into blocks; rank 0 holds the best medians.

    A block is split at the best cut only when Cliff's delta between the two
    pooled halves reaches ``effect_threshold``; the test applies at every
    level of the recursion.
    """
    groups = list(groups)
    if not groups:
        raise ValueError("need at least one group")
    labels = [g.label for g in groups]
    if len(set(labels)) != len(labels):
        raise ValueError("group labels must be unique")
    sign = -1.0 if higher_is_better else 1.0
    # stable sort keeps input order among equal medians
    ordered = sorted(groups, key=lambda g: sign * g.median)

    blocks: list[list[Group]] = []

    def recurse(block: list[Group]) -> None:
        if len(block) > 1:
            pos, _ = best_split(block)
            left = np.concatenate([_values(g) for g in block[:pos]])
            right = np.concatenate([_values(g) for g in block[pos:]])
            if abs(cliffs_delta(left, right)) >= effect_threshold:
                recurse(block[:pos])
                recurse(block[pos:])
                return
        blocks.append(block)

    recurse(ordered)
    ranks = {g.label: r for r, block in enumerate(blocks) for g in block}
    return RankTable(ranks, tuple(g.label for g in ordered))


def summarize_wtl(
    treatment_runs: dict[str, list[float]],
    baseline_runs: dict[str, list[float]],
    effect_threshold: float = SMALL_EFFECT,
    higher_is_better: bool = True,
) -> Counter:
    """Win/tie/loss of treatment against baseline, one verdict per dataset."""
    missing = set(treatment_runs) ^ set(baseline_runs)
    if missing:
        raise ValueError(f"datasets not present on both sides: {sorted(missing)}")
    tally = Counter(win=0, tie=0, loss=0)
    for name in treatment_runs:
        tally[compare_pair(treatment_runs[name], baseline_runs[name],
                           effect_threshold, higher_is_better)] += 1
    return tally


def compare_pair(treatment, baseline, effect_threshold: float = SMALL_EFFECT,
                 higher_is_better: bool = True) -> str:
    table = scott_knott(
        [Group("treatment", treatment), Group("baseline", baseline)],
        effect_threshold,
        higher_is_better,
    )
    if table["treatment"] < table["baseline"]:
        return "win"
    if table["treatment"] > table["baseline"]:
        return "loss"
    return "tie"
