import math

import numpy as np
import pytest

from memstring.medium import CoefficientFunction, ExponentialKernel, StringMedium, ZeroKernel
from memstring.model import build_model
from memstring.sturm_liouville import solve_eigensystem

EXP = dict(a=0.4, eta=1.0)


def exp_nstar(t, omega, a=0.4, eta=1.0):
    """Closed-form ``N_n^*`` for ``N = a exp(-eta t)``."""
    t = np.asarray(t, dtype=float)
    conv = (np.exp(eta * t) * (eta * np.cos(omega * t) + omega * np.sin(omega * t)) - eta)
    conv = -a * eta * np.exp(-eta * t) * conv / (eta ** 2 + omega ** 2)
    return -a * np.exp(-eta * t) + a * np.cos(omega * t) + conv


@pytest.fixture(scope="session")
def const_medium():
    return StringMedium.constant()


@pytest.fixture(scope="session")
def quadratic_medium():
    return StringMedium(1.0, CoefficientFunction.polynomial([1.0, 2.0, 1.0], 1.0),
                        CoefficientFunction.constant(1.0, 1.0),
                        CoefficientFunction.constant(0.0, 1.0))


@pytest.fixture(scope="session")
def const_eig(const_medium):
    return solve_eigensystem(const_medium, 32)


@pytest.fixture(scope="session")
def quadratic_eig(quadratic_medium):
    return solve_eigensystem(quadratic_medium, 32)


@pytest.fixture(scope="session")
def zero_model(const_eig):
    return build_model(const_eig, ZeroKernel(), 2.0, 1e-3)


@pytest.fixture(scope="session")
def exp_model(const_eig):
    return build_model(const_eig, ExponentialKernel(**EXP), 2.0, 1e-3)


def omega_n(n):
    return math.pi * (np.asarray(n) - 0.5)


# -- acceptance summary ------------------------------------------------------------

ACCEPTANCE: dict[int, str] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
