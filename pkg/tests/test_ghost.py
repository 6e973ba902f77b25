import numpy as np
import pytest

import ghostsmell.ghost as ghost
from conftest import blobs
from ghostsmell.dataset import leakage_zero_count, split
from ghostsmell.evalstats import RunRecord
from ghostsmell.ghost import (
    GhostConfig,
    Preprocessor,
    RepeatResult,
    read_results_csv,
    run_experiment,
    run_ghost,
    write_results_csv,
)
from ghostsmell.tuner import ConfigSpace

SMALL = ConfigSpace(n_layers=(1, 2), units=(2, 8), epochs=(5, 10))


def small_cfg(**kw):
    kw.setdefault("space", SMALL)
    kw.setdefault("iterations", 4)
    return GhostConfig(**kw)


@pytest.fixture
def pair():
    return split(blobs(n_rows=120, n_features=4, seed=3), 0.3, 0)


def constant(score):
    def make(pre, cfg):
        return lambda config: score
    return make


@pytest.fixture
def sampling_calls(monkeypatch):
    calls = []
    real = ghost.preprocess_ghost

    def spy(train, two_sample, *args, **kwargs):
        calls.append(two_sample)
        return real(train, two_sample, *args, **kwargs)

    monkeypatch.setattr(ghost, "preprocess_ghost", spy)
    return calls


def test_low_score_triggers_one_two_sample_pass(pair, sampling_calls):
    result = run_ghost(pair.train, pair.test, small_cfg(), constant(0.4))
    assert sampling_calls == [False, True]
    assert result.two_sample_used and result.passes == 2


def test_score_at_tau_never_retries(pair, sampling_calls):
    for score in (0.5, 0.6):
        sampling_calls.clear()
        result = run_ghost(pair.train, pair.test, small_cfg(), constant(score))
        assert sampling_calls == [False]
        assert not result.two_sample_used and result.passes == 1


def test_default_tau():
    assert GhostConfig().tau == 0.5
    assert GhostConfig().iterations == 30
    with pytest.raises(ValueError):
        GhostConfig(tau=1.0)


def test_two_sample_pass_is_larger(pair):
    first = run_ghost(pair.train, pair.test, small_cfg(), constant(0.6))
    second = run_ghost(pair.train, pair.test, small_cfg(), constant(0.1))
    assert second.train_rows > first.train_rows


def test_test_rows_never_reach_training(pair, monkeypatch):
    seen = []
    real = ghost.preprocess_ghost

    def spy(train, *args, **kwargs):
        out = real(train, *args, **kwargs)
        seen.append(out)
        return out

    monkeypatch.setattr(ghost, "preprocess_ghost", spy)
    run_ghost(pair.train, pair.test, small_cfg())
    assert leakage_zero_count(pair.train, pair.test) == 0
    _, scaler = ghost.minmax_fit_transform(pair.train)
    scaled_test = scaler.apply(pair.test)
    for pre in seen:
        assert leakage_zero_count(pre, scaled_test) == 0


def test_test_labels_do_not_influence_tuning(pair):
    shuffled = pair.test.with_rows(pair.test.features, pair.test.labels[::-1].copy())
    a = run_ghost(pair.train, pair.test, small_cfg())
    b = run_ghost(pair.train, shuffled, small_cfg())
    assert [s for _, s in a.tuner_history] == [s for _, s in b.tuner_history]
    assert a.theta_star == b.theta_star


def test_deterministic(pair):
    a = run_ghost(pair.train, pair.test, small_cfg(seed=5))
    b = run_ghost(pair.train, pair.test, small_cfg(seed=5))
    assert a.metrics == b.metrics
    assert a.theta_star == b.theta_star


def test_metrics_are_percentages(pair):
    m = run_ghost(pair.train, pair.test, small_cfg()).metrics
    for v in m.as_dict().values():
        assert 0.0 <= v <= 100.0


def test_feature_mismatch(pair):
    other = split(blobs(n_rows=60, n_features=3), 0.3, 0)
    with pytest.raises(ValueError):
        run_ghost(pair.train, other.test, small_cfg())


def test_experiment_seeds_and_order():
    d = blobs(n_rows=100, n_features=3, seed=1)
    rows = run_experiment(d, "toy", small_cfg(iterations=2), repeats=3, base_seed=10)
    assert [(r.repeat, r.seed) for r in rows] == [(0, 10), (1, 11), (2, 12)]
    assert all(r.dataset_name == "toy" for r in rows)


def test_experiment_parallel_matches_serial():
    d = blobs(n_rows=100, n_features=3, seed=1)
    cfg = small_cfg(iterations=2)
    serial = run_experiment(d, "toy", cfg, repeats=2, base_seed=0, jobs=1)
    parallel = run_experiment(d, "toy", cfg, repeats=2, base_seed=0, jobs=2)
    assert serial == parallel


def test_results_csv_roundtrip(tmp_path):
    rows = [RepeatResult("abd", 0, 7, False, RunRecord(98.36, 100.0, 99.17, 100.0))]
    path = tmp_path / "results.csv"
    write_results_csv(rows, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "dataset_name,repeat,seed,two_sample_used,precision,recall,f1,auc"
    assert lines[1] == "abd,0,7,false,98.4,100.0,99.2,100.0"
    back = read_results_csv(path)
    assert back[0].metrics == RunRecord(98.4, 100.0, 99.2, 100.0)
    write_results_csv(rows, path, append=True)
    assert len(read_results_csv(path)) == 2


def test_results_csv_schema_checked(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("dataset,repeat\nx,0\n")
    with pytest.raises(ValueError, match="expected columns"):
        read_results_csv(path)


@pytest.mark.parametrize("kind", ["none", "minmax", "standardize", "robust-quantile", "max-abs"])
def test_preprocessors(kind):
    rng = np.random.default_rng(0)
    X = np.c_[rng.normal(3, 2, 50), np.full(50, 4.0)]
    out = Preprocessor.fit(kind, X).transform(X)
    assert np.all(np.isfinite(out))
    if kind == "minmax":
        assert out[:, 0].min() == 0.0 and out[:, 0].max() == 1.0
    if kind == "standardize":
        assert abs(out[:, 0].mean()) < 1e-12 and abs(out[:, 0].std() - 1) < 1e-12
    if kind == "max-abs":
        assert np.abs(out).max() == 1.0
    if kind == "robust-quantile":
        assert abs(np.median(out[:, 0])) < 1e-12
    if kind == "none":
        assert np.array_equal(out, X)
