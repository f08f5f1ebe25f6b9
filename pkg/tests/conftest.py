import numpy as np
import pytest

from risee.channel import sample_setup, setup_rng
from risee.config import SystemConfig
from risee.statistics import compute_statistics


def random_unimodular(rng, n):
    return np.exp(1j * rng.uniform(0.0, 2 * np.pi, n))


def random_hermitian(rng, n):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (X + X.conj().T)


@pytest.fixture
def small_config():
    return SystemConfig.from_units(p_tx_dbm=30.0, K=4, N=16, M_max=64, seed=7)


@pytest.fixture
def small_setup(small_config):
    geometry = sample_setup(small_config, setup_rng(small_config.seed, 0))
    return small_config, geometry, compute_statistics(geometry, small_config)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
