import numpy as np
import pytest

from magnomech.model import TWO_PI, baseline_params


def random_hurwitz(rng, n):
    """Random real n x n matrix shifted so every eigenvalue has Re <= -0.1."""
    A = rng.normal(size=(n, n))
    shift = np.max(np.linalg.eigvals(A).real) + rng.uniform(0.1, 1.0)
    return A - shift * np.eye(n)


def random_psd(rng, n):
    B = rng.normal(size=(n, n))
    return B @ B.T


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def base():
    return baseline_params()


@pytest.fixture
def wb():
    return TWO_PI * 10e6


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
