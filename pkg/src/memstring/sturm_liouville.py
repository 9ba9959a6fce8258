"""Shooting solver for ``(alpha phi')' + beta phi + lam rho phi = 0``,
``phi'(0) = phi(l) = 0``.

The ODE is integrated from x = 0 with ``phi(0) = 1, phi'(0) = 0`` as the
first-order system ``u' = w / alpha, w' = -(beta + lam rho) u`` (``w =
alpha phi'``) by an adaptive Dormand-Prince 5(4) pair.  A third component
accumulates ``int rho u^2`` so eigenfunctions are normalised to integrator
accuracy.  Sturm oscillation (number of interior zeros of ``phi(.; lam)``
equals the number of eigenvalues below ``lam``) gives a robust bracket for
each mode before the shooting residual ``phi(l; lam)`` is refined with
Brent's method.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np
from scipy import integrate, optimize

from .errors import DegenerateTraceError, EigenOrderingError
from .medium import StringMedium, optical_length

RTOL = 1e-12
ZERO_LAMBDA_TOL = 1e-12

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0, 0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200,
                187 / 2100, 1 / 40])
_E = _B5 - _B4


@numba.njit(cache=True, nogil=True)
def _cubic(c, h):
    return c[0] + h * (c[1] + h * (c[2] + h * c[3]))


@numba.njit(cache=True, nogil=True)
def _shoot(lam, stops, seg_rho, seg_alpha, seg_beta, left_rho, left_alpha, left_beta,
           rho_c, alpha_c, beta_c, rtol, atol):
    """Integrate across consecutive ``stops`` without stepping over any.

    Returns ``(u(l), w(l), int rho u^2, interior zeros, u at stops, w at stops)``.
    Coefficient segment indices and segment origins are given per stop interval.
    """
    y = np.array([1.0, 0.0, 0.0])
    k = np.zeros((7, 3))
    ytmp = np.zeros(3)
    ynew = np.zeros(3)
    n_stops = stops.shape[0]
    us = np.zeros(n_stops)
    ws = np.zeros(n_stops)
    us[0] = 1.0
    zeros = 0
    length = stops[n_stops - 1]
    wavenumber = math.sqrt(abs(lam) * rho_c[0, 0] / alpha_c[0, 0]) + 1.0
    h_prop = min(0.05 / wavenumber, length / 10)
    for i in range(n_stops - 1):
        x = stops[i]
        x_end = stops[i + 1]
        cr = rho_c[seg_rho[i]]
        ca = alpha_c[seg_alpha[i]]
        cb = beta_c[seg_beta[i]]
        while x < x_end:
            h = h_prop
            last = x + h >= x_end
            if last:
                h = x_end - x
            for s in range(7):
                xs = x + _C[s] * h
                for j in range(3):
                    acc = y[j]
                    for m in range(s):
                        acc += h * _A[s, m] * k[m, j]
                    ytmp[j] = acc
                r = _cubic(cr, xs - left_rho[i])
                a = _cubic(ca, xs - left_alpha[i])
                b = _cubic(cb, xs - left_beta[i])
                k[s, 0] = ytmp[1] / a
                k[s, 1] = -(b + lam * r) * ytmp[0]
                k[s, 2] = r * ytmp[0] * ytmp[0]
            err = 0.0
            for j in range(3):
                acc = y[j]
                e = 0.0
                for s in range(7):
                    acc += h * _B5[s] * k[s, j]
                    e += h * _E[s] * k[s, j]
                ynew[j] = acc
                sc = atol + rtol * max(abs(y[j]), abs(acc))
                err += (e / sc) ** 2
            err = math.sqrt(err / 3.0)
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            if err <= 1.0:
                if (y[0] > 0.0 and ynew[0] < 0.0) or (y[0] < 0.0 and ynew[0] > 0.0):
                    zeros += 1
                x = x_end if last else x + h
                for j in range(3):
                    y[j] = ynew[j]
                # a clipped final step says nothing about the natural step size
                if not last or fac < 1.0:
                    h_prop = h * fac
            else:
                h_prop = h * fac
        us[i + 1] = y[0]
        ws[i + 1] = y[1]
    return y[0], y[1], y[2], zeros, us, ws


class _Shooter:
    """Binds a medium to the compiled integrator for a fixed set of stops."""

    def __init__(self, medium: StringMedium, extra_stops=None, rtol=RTOL, atol=1e-14):
        stops = medium.breakpoints()
        if extra_stops is not None:
            stops = np.unique(np.concatenate([stops, extra_stops]))
        self.stops = stops
        mid = 0.5 * (stops[:-1] + stops[1:])
        args = []
        for coef in (medium.rho, medium.alpha, medium.beta):
            mesh = np.asarray(coef.mesh)
            seg = np.clip(np.searchsorted(mesh, mid, side="right") - 1, 0, len(mesh) - 2)
            args.append((seg.astype(np.int64), mesh[seg], np.ascontiguousarray(coef.coefficients)))
        (self.seg_r, self.left_r, self.c_r), (self.seg_a, self.left_a, self.c_a), \
            (self.seg_b, self.left_b, self.c_b) = args
        self.rtol = rtol
        self.atol = atol

    def __call__(self, lam: float):
        return _shoot(float(lam), self.stops, self.seg_r, self.seg_a, self.seg_b,
                      self.left_r, self.left_a, self.left_b,
                      self.c_r, self.c_a, self.c_b, self.rtol, self.atol)

    def residual(self, lam: float) -> float:
        return self(lam)[0]

    def count(self, lam: float) -> int:
        return self(lam)[3]


def _find_eigenvalue(shoot: _Shooter, n: int, L: float) -> float:
    omega0 = math.pi * (n - 0.5) / L
    spacing = math.pi / L
    lo = max(omega0 - spacing / 2, 0.0) ** 2
    hi = (omega0 + spacing / 2) ** 2
    counts = {}

    def count(lam):
        if lam not in counts:
            counts[lam] = shoot.count(lam)
        return counts[lam]

    width = max(hi - lo, 1.0)
    while count(lo) >= n:
        lo -= width
        width *= 2
    width = max(hi - lo, 1.0)
    while count(hi) < n:
        hi += width
        width *= 2
    for _ in range(200):
        if count(lo) == n - 1 and count(hi) == n:
            break
        mid = 0.5 * (lo + hi)
        if count(mid) >= n:
            hi = mid
        else:
            lo = mid
    else:
        raise EigenOrderingError(f"could not isolate eigenvalue {n}")
    return optimize.brentq(shoot.residual, lo, hi, xtol=1e-14, rtol=1e-14, maxiter=200)


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """First ``n_modes`` eigenpairs, ordered ascending.

    ``omegas`` are complex: ``sqrt(lam)`` for ``lam >= 0`` and ``i sqrt(-lam)``
    otherwise.  ``phi``/``dphi`` hold eigenfunctions and derivatives sampled on
    the uniform grid ``x``, normalised to ``int rho phi^2 = 1`` with
    ``phi(0) > 0``.
    """

    medium: StringMedium
    lambdas: np.ndarray
    omegas: np.ndarray
    x: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    phi0: np.ndarray
    kappas: np.ndarray
    L: float
    T0: float
    zero_modes: np.ndarray

    @property
    def n_modes(self) -> int:
        return len(self.lambdas)

    def inner(self, f, g) -> float:
        """rho-weighted L2 product of functions sampled on ``x``."""
        return integrate.simpson(self.medium.rho(self.x) * f * g, x=self.x)


def omega_from_lambda(lam):
    lam = np.asarray(lam, dtype=float)
    om = np.where(lam >= 0, np.sqrt(np.abs(lam)), 1j * np.sqrt(np.abs(lam)))
    return np.where(np.abs(lam) <= ZERO_LAMBDA_TOL, 0.0, om).astype(complex)


def solve_eigensystem(medium: StringMedium, n_modes: int, *, rtol: float = RTOL,
                      threads: int = 1, n_x: int | None = None) -> EigenSystem:
    """Shooting solution of the Sturm-Liouville problem for the first ``n_modes``."""
    if n_modes < 1:
        raise ValueError("n_modes must be positive")
    L = optical_length(medium)
    shoot = _Shooter(medium, rtol=rtol)
    modes = range(1, n_modes + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            lambdas = list(pool.map(lambda n: _find_eigenvalue(shoot, n, L), modes))
    else:
        lambdas = [_find_eigenvalue(shoot, n, L) for n in modes]
    lambdas = np.array(lambdas)
    if np.any(np.diff(lambdas) <= 0):
        raise EigenOrderingError("eigenvalue sequence is not strictly increasing")

    # sample eigenfunctions with >= 40 points per shortest local wavelength
    probe = np.linspace(0, medium.length, 2001)
    slowness = np.max(np.sqrt(medium.rho(probe) / medium.alpha(probe)))
    omega_max = math.sqrt(max(abs(lambdas[-1]), 1.0))
    if n_x is None:
        n_x = max(2001, math.ceil(40 * medium.length * omega_max * slowness / (2 * math.pi)) + 1)
    n_x += (n_x + 1) % 2
    x = np.linspace(0.0, medium.length, n_x)
    sampler = _Shooter(medium, extra_stops=x, rtol=rtol)
    pick = np.searchsorted(sampler.stops, x)
    alpha_x = medium.alpha(x)
    phi = np.empty((n_modes, n_x))
    dphi = np.empty((n_modes, n_x))
    for i, lam in enumerate(lambdas):
        _, _, norm2, _, us, ws = sampler(lam)
        scale = 1.0 / math.sqrt(norm2)
        phi[i] = us[pick] * scale
        dphi[i] = ws[pick] * scale / alpha_x
    phi[:, -1] = 0.0
    phi0 = phi[:, 0].copy()
    if np.min(np.abs(phi0)) < 1e-10:
        raise DegenerateTraceError("eigenfunction trace phi_n(0) vanished")
    kappas = -float(medium.alpha(0.0)) * phi0
    omegas = omega_from_lambda(lambdas)
    return EigenSystem(medium, lambdas, omegas, x, phi, dphi, phi0, kappas, L, 2 * L,
                       np.abs(lambdas) <= ZERO_LAMBDA_TOL)


def asymptotic_gap(eig: EigenSystem) -> np.ndarray:
    """Deviation ``|omega_n - pi (n - 1/2) / L|`` from the leading asymptotics."""
    n = np.arange(1, eig.n_modes + 1)
    return np.abs(eig.omegas - math.pi * (n - 0.5) / eig.L)


def trace_estimate(eig: EigenSystem) -> tuple[float, float]:
    traces = np.abs(eig.phi0)
    lo, hi = float(traces.min()), float(traces.max())
    if lo < 1e-10:
        raise DegenerateTraceError("min |phi_n(0)| vanished")
    return lo, hi


def rayleigh_residual(eig: EigenSystem) -> np.ndarray:
    """``|int (alpha phi'^2 - beta phi^2) dx - lam_n|`` per mode."""
    a = eig.medium.alpha(eig.x)
    b = eig.medium.beta(eig.x)
    q = integrate.simpson(a * eig.dphi ** 2 - b * eig.phi ** 2, x=eig.x, axis=1)
    return np.abs(q - eig.lambdas)


def orthonormality_defect(eig: EigenSystem) -> np.ndarray:
    """Gram matrix of the eigenfunctions in the rho-weighted product minus identity."""
    w = eig.medium.rho(eig.x)
    gram = integrate.simpson(w * eig.phi[:, None, :] * eig.phi[None, :, :], x=eig.x, axis=2)
    return gram - np.eye(eig.n_modes)
