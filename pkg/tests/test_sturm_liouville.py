import math

import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from memstring.medium import CoefficientFunction, StringMedium
from memstring.sturm_liouville import (asymptotic_gap, orthonormality_defect,
                                       rayleigh_residual, solve_eigensystem, trace_estimate)

from conftest import omega_n


def fd_eigen(rho, m, n_modes):
    """Second-order finite differences for ``-phi'' = lam rho phi``, ``phi'(0) = phi(1) = 0``.

    Row 0 carries the ghost-point Neumann condition at half weight so the
    pencil stays symmetric.  Returns eigenvalues and the ``phi(0)`` traces
    of rho-normalized eigenvectors.
    """
    h = 1.0 / m
    x = np.linspace(0.0, 1.0, m + 1)[:-1]
    b = rho(x)
    b[0] *= 0.5
    diag = np.full(m, 2.0 / h ** 2)
    diag[0] = 1.0 / h ** 2
    off = np.full(m - 1, -1.0 / h ** 2)
    s = 1.0 / np.sqrt(b)
    lam, vec = eigh_tridiagonal(diag * s * s, off * s[:-1] * s[1:],
                                select="i", select_range=(0, n_modes - 1))
    phi = vec * s[:, None]                       # B-orthonormal in the discrete sense
    norm = np.sqrt(h * np.sum(b[:, None] * phi ** 2, axis=0))
    return lam, np.abs(phi[0] / norm)


@pytest.fixture(scope="module")
def fd_oracle():
    rho = lambda x: (1 + x) ** 2
    coarse, _ = fd_eigen(rho, 2500, 32)
    fine, traces = fd_eigen(rho, 5000, 32)
    return (4 * fine - coarse) / 3, traces


def test_constant_medium_exact(const_eig):
    n = np.arange(1, 33)
    assert np.max(np.abs(const_eig.omegas - omega_n(n))) <= 1e-8
    assert np.max(np.abs(const_eig.kappas + math.sqrt(2))) <= 1e-8
    ref = math.sqrt(2) * np.cos(np.outer(omega_n(n), const_eig.x))
    assert np.max(np.abs(const_eig.phi - ref)) <= 1e-8
    assert const_eig.L == pytest.approx(1.0) and const_eig.T0 == pytest.approx(2.0)


def test_constant_medium_gaps_vanish(const_eig):
    assert np.max(asymptotic_gap(const_eig)) <= 1e-8


def test_constant_beta_shift():
    eig = solve_eigensystem(StringMedium.constant(beta=3.0), 16)
    n = np.arange(1, 17)
    assert np.allclose(eig.lambdas, omega_n(n) ** 2 - 3.0, rtol=1e-10, atol=1e-9)
    ref = math.sqrt(2) * np.cos(np.outer(omega_n(n), eig.x))
    assert np.max(np.abs(eig.phi - ref)) <= 1e-8


def test_beta_gap_decays_like_one_over_n():
    eig = solve_eigensystem(StringMedium.constant(beta=5.0), 32)
    gap = asymptotic_gap(eig)
    # closed form sqrt(lam0 - 5) - sqrt(lam0)
    lam0 = omega_n(np.arange(1, 33)) ** 2
    assert np.allclose(gap, np.abs(np.sqrt(lam0 - 5 + 0j) - np.sqrt(lam0)), atol=1e-9)
    assert gap[31] / gap[15] <= 0.7
    lo, hi = trace_estimate(eig)
    assert 1.0 <= lo <= hi <= 2.0


def test_negative_eigenvalue_gives_imaginary_omega():
    eig = solve_eigensystem(StringMedium.constant(beta=30.0), 4)
    assert eig.lambdas[0] == pytest.approx(math.pi ** 2 / 4 - 30.0, rel=1e-10)
    assert eig.omegas[0].real == 0.0 and eig.omegas[0].imag > 0
    assert eig.omegas[0].imag == pytest.approx(math.sqrt(30.0 - math.pi ** 2 / 4))
    # lam_2 = 9 pi^2 / 4 - 30 < 0 as well
    assert np.all(eig.omegas[:2].real == 0) and np.all(eig.omegas[2:].imag == 0)


def test_quadratic_density_matches_finite_differences(quadratic_eig, fd_oracle):
    lam_fd, _ = fd_oracle
    rel = np.abs(quadratic_eig.lambdas[:16] - lam_fd[:16]) / lam_fd[:16]
    assert np.max(rel) <= 1e-6


def test_quadratic_density_tail_gaps(quadratic_eig, fd_oracle):
    spacing = math.pi / 1.5
    gap = asymptotic_gap(quadratic_eig)
    assert np.all(gap[23:32] < 0.5 * spacing)
    n = np.arange(24, 33)
    fd_gap = np.abs(np.sqrt(fd_oracle[0][23:32]) - math.pi * (n - 0.5) / 1.5)
    assert np.all(fd_gap < 0.5 * spacing)
    bands = [gap[i:i + 8].mean() for i in (0, 8, 16, 24)]
    assert all(b2 <= b1 for b1, b2 in zip(bands, bands[1:]))


def test_quadratic_density_traces(quadratic_eig, fd_oracle):
    lo, hi = trace_estimate(quadratic_eig)
    assert hi / lo <= 5
    assert np.allclose(quadratic_eig.phi0[:16], fd_oracle[1][:16], rtol=1e-3)


@pytest.mark.parametrize("name", ["const_eig", "quadratic_eig"])
def test_eigensystem_invariants(name, request):
    eig = request.getfixturevalue(name)
    assert np.all(np.diff(eig.lambdas) > 0)
    assert np.all(eig.phi0 > 0)
    assert np.allclose(eig.kappas, -eig.medium.alpha(0.0) * eig.phi0)
    defect = orthonormality_defect(eig)
    assert np.max(np.abs(np.diag(defect))) <= 1e-8
    assert np.max(np.abs(defect)) <= 1e-6
    assert np.all(rayleigh_residual(eig) <= 1e-6 * (1 + np.abs(eig.lambdas)))
    om = eig.omegas.real
    assert np.min(np.diff(om)) >= 0.5 * math.pi / eig.L


def test_tolerance_halving_is_stable(quadratic_medium, quadratic_eig):
    finer = solve_eigensystem(quadratic_medium, 32, rtol=5e-13)
    assert np.max(np.abs(finer.lambdas / quadratic_eig.lambdas - 1)) <= 1e-8


def test_piecewise_medium_is_consistent():
    # two-layer string: rho = 1 then 4 (smoothed by a cubic) -- checks breakpoint handling
    rho = CoefficientFunction((0.0, 0.4, 0.6, 1.0),
                              ((1.0, 0, 0, 0), (1.0, 0.0, 225.0, -750.0), (4.0, 0, 0, 0)))
    med = StringMedium(1.0, rho, CoefficientFunction.constant(1.0, 1.0),
                       CoefficientFunction.constant(0.0, 1.0))
    eig = solve_eigensystem(med, 12)
    assert np.max(np.abs(orthonormality_defect(eig))) <= 1e-6
    assert np.all(rayleigh_residual(eig) <= 1e-6 * (1 + eig.lambdas))


def test_thread_count_does_not_change_result(quadratic_medium, quadratic_eig):
    par = solve_eigensystem(quadratic_medium, 32, threads=4)
    assert np.array_equal(par.lambdas, quadratic_eig.lambdas)
    assert np.array_equal(par.phi, quadratic_eig.phi)
