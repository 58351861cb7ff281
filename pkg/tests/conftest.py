import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rknn_tsvm.data import Dataset

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

# filled by tests/test_acceptance.py, echoed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def blobs(n_pos, n_neg, d=2, gap=3.0, spread=1.0, seed=0):
    """Two Gaussian blobs centred at +-gap/2 on the first axis."""
    rng = np.random.default_rng(seed)
    mu = np.zeros(d)
    mu[0] = gap / 2
    A = rng.normal(size=(n_pos, d)) * spread + mu
    B = rng.normal(size=(n_neg, d)) * spread - mu
    return Dataset(np.vstack([A, B]), np.r_[np.ones(n_pos, int), -np.ones(n_neg, int)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
