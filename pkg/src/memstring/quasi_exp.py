"""Quasi-exponential families of the memory-perturbed oscillator.

For each frequency ``omega`` the Cauchy problems

    x'' + omega^2 x + omega^2 int_0^t N(t - tau) x(tau) dtau = 0

are marched on a uniform grid with ``(x, x') = (1, 0)`` (giving ``c``) and
``(0, 1)`` (giving ``sigma = s / omega``, whose ``omega -> 0`` limit is
``t``).  Within each step the oscillator is propagated exactly with the
memory forcing interpolated linearly between grid values; the memory
convolution uses product-trapezoidal weights on the stored history, treated
implicitly at the new node.  The scheme is second order, unconditionally
stable, and exact for ``N = 0``.
"""
from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np
from scipy import integrate

from .errors import DegeneratePoleError, ResolutionError
from .medium import MemoryKernel, ZeroKernel
from .sturm_liouville import EigenSystem

ZERO_OMEGA_TOL = 1e-12
MAX_OMEGA_DT = 0.5


def time_grid(T: float, dt: float) -> np.ndarray:
    steps = int(round(T / dt))
    if steps < 1 or abs(steps * dt - T) > 1e-9 * T:
        raise ValueError(f"T={T} is not an integer multiple of dt={dt}")
    return np.linspace(0.0, T, steps + 1)


def trapezoid_weights(n_points: int, dt: float) -> np.ndarray:
    w = np.full(n_points, dt)
    w[0] = w[-1] = dt / 2
    return w


@numba.njit(cache=True, nogil=True)
def _march(omega, kern, dt, x0, v0):
    m = kern.shape[0]
    x = np.zeros(m, dtype=np.complex128)
    v = np.zeros(m, dtype=np.complex128)
    x[0] = x0
    v[0] = v0
    th = omega * dt
    cos_t = cmath.cos(th)
    if abs(omega) < 1e-12:
        sin_o = dt + 0j        # sin(omega dt) / omega
        o_sin = 0j             # omega sin(omega dt)
    else:
        sin_o = cmath.sin(th) / omega
        o_sin = omega * cmath.sin(th)
    beta = 0.5 * dt * kern[0]
    j_prev = 0j
    for k in range(m - 1):
        # history part of the trapezoid sum for J(t_{k+1})
        hist = 0.5 * kern[k + 1] * x[0]
        for j in range(1, k + 1):
            hist += kern[k + 1 - j] * x[j]
        hist *= dt
        a = x[k] + j_prev
        b = v[k] - j_prev / dt
        denom = 1.0 + beta - beta * sin_o / dt
        x_new = (-hist + a * cos_t + b * sin_o + hist * sin_o / dt) / denom
        j_new = hist + beta * x_new
        dj = (j_new - j_prev) / dt
        x[k + 1] = x_new
        v[k + 1] = -dj - a * o_sin + (v[k] + dj) * cos_t
        j_prev = j_new
    return x, v


@dataclass(frozen=True, eq=False)
class QuasiExpFamily:
    """Sampled ``c``, ``s``, ``s/omega`` and ``e_pm = c +- i s`` for one mode.

    For ``omega = 0`` the pair ``e_plus = 1``, ``e_minus = t`` replaces the
    degenerate exponentials.
    """

    omega: complex
    grid: np.ndarray
    c: np.ndarray
    s: np.ndarray
    s_over_omega: np.ndarray
    dc: np.ndarray
    ds_over_omega: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def is_zero_mode(self) -> bool:
        return abs(self.omega) <= ZERO_OMEGA_TOL

    @property
    def e_plus(self) -> np.ndarray:
        if self.is_zero_mode:
            return np.ones_like(self.c)
        return self.c + 1j * self.s

    @property
    def e_minus(self) -> np.ndarray:
        if self.is_zero_mode:
            return self.s_over_omega.copy()
        return self.c - 1j * self.s


def _kernel_samples(kernel: MemoryKernel, grid: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(kernel.N(grid), dtype=float) + np.zeros_like(grid))


def integrate_family(omega: complex, kernel: MemoryKernel, T: float, dt: float,
                     *, kern: np.ndarray | None = None) -> QuasiExpFamily:
    """Integrate the ``c`` and ``s/omega`` Cauchy problems on ``[0, T]``."""
    omega = complex(omega)
    if abs(omega) * dt > MAX_OMEGA_DT:
        raise ResolutionError(
            f"|omega| dt = {abs(omega) * dt:.3g} exceeds {MAX_OMEGA_DT}; "
            f"use dt <= {MAX_OMEGA_DT / abs(omega):.3g}")
    grid = time_grid(T, dt)
    if kern is None:
        kern = _kernel_samples(kernel, grid)
    if abs(omega) <= ZERO_OMEGA_TOL:
        c = np.ones_like(grid, dtype=complex)
        sig = grid.astype(complex)
        return QuasiExpFamily(0j, grid, c, np.zeros_like(c), sig,
                              np.zeros_like(c), np.ones_like(c))
    c, dc = _march(omega, kern, dt, 1.0 + 0j, 0j)
    sig, dsig = _march(omega, kern, dt, 0j, 1.0 + 0j)
    return QuasiExpFamily(omega, grid, c, omega * sig, sig, dc, dsig)


def integrate_families(omegas, kernel: MemoryKernel, T: float, dt: float,
                       threads: int = 1) -> list[QuasiExpFamily]:
    grid = time_grid(T, dt)
    kern = _kernel_samples(kernel, grid)

    def one(om):
        return integrate_family(om, kernel, T, dt, kern=kern)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, omegas))
    return [one(om) for om in omegas]


def nstar_kernel(t: float, omega: complex, kernel: MemoryKernel) -> complex:
    """``-N(t) + N(0) cos(omega t) + int_0^t cos(omega z) N'(t - z) dz``."""
    omega = complex(omega)
    if isinstance(kernel, ZeroKernel) or t == 0:
        return 0.0
    base = -float(kernel.N(t)) + float(kernel.N(0.0)) * cmath.cos(omega * t)
    if omega.imag == 0:
        w = omega.real
        val, _ = integrate.quad(lambda z: float(kernel.dN(t - z)), 0.0, t,
                                weight="cos", wvar=w, epsabs=1e-12, epsrel=1e-10,
                                limit=400)
        return float((base + val).real)
    re, _ = integrate.quad(lambda z: (cmath.cos(omega * z) * float(kernel.dN(t - z))).real,
                           0.0, t, epsabs=1e-12, epsrel=1e-10, limit=400)
    im, _ = integrate.quad(lambda z: (cmath.cos(omega * z) * float(kernel.dN(t - z))).imag,
                           0.0, t, epsabs=1e-12, epsrel=1e-10, limit=400)
    return complex(base + re + 1j * im)


def asymptotic_reference(omega: complex, nu: float, grid: np.ndarray):
    """Leading-order family ``exp(+- i omega t + nu t)`` as ``(plus, minus)``."""
    grid = np.asarray(grid, dtype=float)
    return (np.exp(1j * omega * grid + nu * grid), np.exp(-1j * omega * grid + nu * grid))


@dataclass(frozen=True, eq=False)
class ClosenessReport:
    """Deviation ``E_n = e_n - exp(+- i omega_n t + nu t)`` per mode."""

    modes: np.ndarray
    max_plus: np.ndarray
    max_minus: np.ndarray
    l2sq_plus: np.ndarray
    l2sq_minus: np.ndarray

    @property
    def scaled_plus(self) -> np.ndarray:
        return self.modes * self.max_plus

    @property
    def scaled_minus(self) -> np.ndarray:
        return self.modes * self.max_minus

    @property
    def scaled(self) -> np.ndarray:
        return np.maximum(self.scaled_plus, self.scaled_minus)

    @property
    def tail_sum(self) -> float:
        return float(np.sum(self.l2sq_plus + self.l2sq_minus))

    @property
    def bounded(self) -> bool:
        """``n max|E_n|`` at the last mode is at most twice its mid-range value."""
        s = self.scaled
        return bool(s[-1] <= 2 * s[(len(s) - 1) // 2])


def closeness_from_families(families: list[QuasiExpFamily], nu: float) -> ClosenessReport:
    maxp, maxm, l2p, l2m = [], [], [], []
    for fam in families:
        w = trapezoid_weights(len(fam.grid), fam.dt)
        ref_p, ref_m = asymptotic_reference(fam.omega, nu, fam.grid)
        if fam.is_zero_mode:
            ep = fam.e_plus - np.exp(nu * fam.grid)
            em = fam.e_minus - fam.grid * np.exp(nu * fam.grid)
        else:
            ep, em = fam.e_plus - ref_p, fam.e_minus - ref_m
        maxp.append(np.max(np.abs(ep)))
        maxm.append(np.max(np.abs(em)))
        l2p.append(float(np.sum(w * np.abs(ep) ** 2)))
        l2m.append(float(np.sum(w * np.abs(em) ** 2)))
    return ClosenessReport(np.arange(1, len(families) + 1), np.array(maxp), np.array(maxm),
                           np.array(l2p), np.array(l2m))


def closeness_report(eig: EigenSystem, kernel: MemoryKernel, T: float, dt: float,
                     threads: int = 1) -> ClosenessReport:
    families = integrate_families(eig.omegas, kernel, T, dt, threads)
    return closeness_from_families(families, kernel.nu)


# -- exponential kernel: exact solution by residues --------------------------

def exponential_kernel_poles(a: float, eta: float, omega: float) -> np.ndarray:
    """Roots of ``p^3 + eta p^2 + omega^2 p + omega^2 (a + eta)``, polished by Newton."""
    coeffs = np.array([1.0, eta, omega ** 2, omega ** 2 * (a + eta)], dtype=float)
    roots = np.roots(coeffs).astype(complex)
    dcoeffs = np.polyder(coeffs)
    for _ in range(5):
        step = np.polyval(coeffs, roots) / np.polyval(dcoeffs, roots)
        roots = roots - step
    scale = max(1.0, abs(omega))
    d2 = np.polyder(dcoeffs)
    eps = np.finfo(float).eps
    for i in range(3):
        for j in range(i + 1, 3):
            mid = 0.5 * (roots[i] + roots[j])
            # splitting of a double root caused by rounding the coefficients
            size = np.polyval(np.abs(coeffs), abs(mid))
            curv = abs(np.polyval(d2, mid)) / 2
            radius = 4 * math.sqrt(eps * size / curv) if curv > 0 else math.inf
            if abs(roots[i] - roots[j]) < 1e-9 * scale + radius:
                raise DegeneratePoleError(
                    f"repeated pole near {mid:.6g}; residue expansion invalid")
    return roots[np.argsort(-roots.imag)]


def laplace_oracle(a: float, eta: float, omega: float, grid: np.ndarray):
    """Exact ``(e_plus, e_minus)`` for ``N(t) = a exp(-eta t)`` via the three-pole
    residue expansion of ``(p +- i omega)(p + eta) / D(p)``."""
    if omega == 0:
        raise ValueError("laplace_oracle needs omega != 0")
    grid = np.asarray(grid, dtype=float)
    poles = exponential_kernel_poles(a, eta, omega)
    dden = np.polyder(np.array([1.0, eta, omega ** 2, omega ** 2 * (a + eta)]))
    out = []
    for sign in (+1, -1):
        res = (poles + sign * 1j * omega) * (poles + eta) / np.polyval(dden, poles)
        out.append(np.exp(np.outer(grid, poles)) @ res)
    return out[0], out[1]


__all__ = [
    "QuasiExpFamily", "ClosenessReport", "integrate_family", "integrate_families",
    "nstar_kernel", "asymptotic_reference", "closeness_report", "closeness_from_families",
    "laplace_oracle", "exponential_kernel_poles", "time_grid", "trapezoid_weights",
]
