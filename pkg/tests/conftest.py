import numpy as np
import pytest

from imzero.objective import (
    BoxQP,
    Logistic,
    MpcRollout,
    PseudoHuber,
    Quadratic,
    Rosenbrock,
    WorstFunction,
    cubic,
    quartic,
)

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def zoo(seed: int = 0):
    """One member of every objective kind, built from a fixed seed."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((6, 3))
    return {
        "quadratic": Quadratic(4),
        "worst": WorstFunction(5, 1.0),
        "pseudo-huber": PseudoHuber(A, rng.standard_normal(6), lam=0.5, mu=0.7),
        "logistic": Logistic(rng.standard_normal((40, 3)), np.sign(rng.standard_normal(40) + 0.1)),
        "rosenbrock": Rosenbrock(),
        "boxqp": BoxQP(rng.standard_normal(4)),
        "mpc": MpcRollout(),
        "cubic": cubic(2),
        "quartic": quartic(3),
    }


@pytest.fixture(scope="session")
def objectives():
    return zoo()
