import numpy as np
import pytest

from ghostsmell.dataset import Dataset, save_csv


def blobs(n_rows=1000, n_features=10, minority=0.2, gap=2.0, seed=7):
    """Two Gaussian blobs; class 1 is the minority, shifted by ``gap`` per feature."""
    rng = np.random.default_rng(seed)
    n_pos = int(round(n_rows * minority))
    X = np.vstack([
        rng.normal(0.0, 1.0, (n_rows - n_pos, n_features)),
        rng.normal(gap, 1.0, (n_pos, n_features)),
    ])
    y = np.r_[np.zeros(n_rows - n_pos), np.ones(n_pos)]
    return Dataset(X, y)


def low_rank(n_rows=300, n_features=20, rank=2, noise=0.01, seed=3):
    rng = np.random.default_rng(seed)
    latent = rng.normal(size=(n_rows, rank))
    mixing = rng.normal(size=(rank, n_features))
    X = latent @ mixing + rng.normal(0.0, noise, (n_rows, n_features))
    y = (latent[:, 0] > 0).astype(int)
    return Dataset(X, y)


@pytest.fixture
def ten_rows():
    """8 majority (class 0) and 2 minority (class 1) rows, n = 0.2."""
    X = np.arange(20, dtype=float).reshape(10, 2) / 20.0
    y = np.array([0] * 8 + [1] * 2)
    return Dataset(X, y, ("f1", "f2"))


@pytest.fixture
def write_csv(tmp_path):
    def _write(d, name="data.csv"):
        path = tmp_path / name
        save_csv(d, path)
        return path
    return _write


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance(request):
    """Record a one-line verdict for an acceptance criterion."""
    def record(name, passed, detail=""):
        status = "NOT RUN" if passed is None else "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES.append(f"[{status}] {name}: {detail}")
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
