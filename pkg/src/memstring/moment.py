"""Moment problem for the auxiliary control and recovery of the physical control.

The terminal conditions reduce to

    kappa_n int_0^T g(t) s_n(T - t) dt = omega_n v0_n,
    kappa_n int_0^T g(t) c_n(T - t) dt = v1_n,

which is solved in the least-norm sense inside the span of the truncated
family.  The physical control follows from the second-kind Volterra
relation ``g = f + N * f``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numba
import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .errors import ConfigError, DegenerateTraceError, IllPosedError
from .medium import MemoryKernel
from .model import ModalModel
from .quasi_exp import time_grid
from .sturm_liouville import EigenSystem

MAX_GRAM_CONDITION = 1e14


class TargetWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class TargetState:
    """Terminal state ``(v0, v1)``.

    With ``x=None`` the arrays are eigen-coefficients ``(v, phi_n)_H``;
    otherwise they are samples on ``x`` (interpolated onto the eigenfunction
    grid when the grids differ).
    """

    v0: np.ndarray
    v1: np.ndarray
    x: np.ndarray | None = None

    @classmethod
    def zero(cls, n_modes: int) -> "TargetState":
        return cls(np.zeros(n_modes), np.zeros(n_modes))

    @classmethod
    def from_coefficients(cls, v0, v1) -> "TargetState":
        return cls(np.asarray(v0, dtype=float), np.asarray(v1, dtype=float))

    @classmethod
    def from_samples(cls, x, v0, v1) -> "TargetState":
        x, v0, v1 = (np.asarray(a, dtype=float) for a in (x, v0, v1))
        if not (x.shape == v0.shape == v1.shape):
            raise ConfigError("target samples: x, v0, v1 differ in shape")
        if abs(v0[-1]) > 1e-8:
            raise ConfigError("target.v0: must vanish at x = l")
        return cls(v0, v1, x)

    def padded(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Coefficient arrays truncated or zero-padded to ``n`` modes."""
        if self.x is not None:
            raise ValueError("spatial target: project it onto an eigensystem first")
        out = np.zeros((2, n))
        m = min(n, len(self.v0))
        out[0, :m], out[1, :m] = self.v0[:m], self.v1[:m]
        return out[0], out[1]

    def scaled(self, factor: float) -> "TargetState":
        return TargetState(factor * self.v0, factor * self.v1, self.x)


def project_target(target: TargetState, eig: EigenSystem) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-coefficients ``v0_n = (v0, phi_n)_H``, ``v1_n = (v1, phi_n)_H``."""
    if target.x is None:
        return target.padded(eig.n_modes)
    if target.x.shape == eig.x.shape and np.allclose(target.x, eig.x, rtol=0, atol=1e-14):
        s0, s1 = target.v0, target.v1
    else:
        s0 = CubicSpline(target.x, target.v0)(eig.x)
        s1 = CubicSpline(target.x, target.v1)(eig.x)
    w = eig.medium.rho(eig.x) * eig.phi
    return (integrate.simpson(w * s0, x=eig.x, axis=1),
            integrate.simpson(w * s1, x=eig.x, axis=1))


def _check_square_summable(weighted: np.ndarray) -> None:
    # tail blocks of |omega v0|^2 + |v1|^2 should not grow
    n = len(weighted)
    if n < 8:
        return
    blocks = np.array_split(weighted, 4)
    sums = [float(np.sum(b)) for b in blocks]
    if sums[-1] > sums[-2] > 0 and sums[-2] > sums[-3]:
        warnings.warn("target coefficients grow in the tail; truncation may dominate",
                      TargetWarning, stacklevel=3)


def _mode_scale(eig: EigenSystem) -> np.ndarray:
    """Scale of the sine-type family element: ``|omega_n|``, or 1 for a zero mode."""
    om = np.abs(eig.omegas)
    return np.where(eig.zero_modes, 1.0, om)


def moment_coefficients(target: TargetState, eig: EigenSystem) -> np.ndarray:
    """Interleaved right-hand side ``[omega_1 v0_1 / kappa_1, v1_1 / kappa_1, ...]``.

    A zero mode uses ``v0_n / kappa_n`` against the family element ``t``.
    """
    if np.min(np.abs(eig.kappas)) < 1e-12:
        raise DegenerateTraceError("kappa_n below 1e-12")
    v0, v1 = project_target(target, eig)
    scale = _mode_scale(eig)
    _check_square_summable((scale * v0) ** 2 + v1 ** 2)
    rhs = np.empty(2 * eig.n_modes)
    rhs[0::2] = scale * v0 / eig.kappas
    rhs[1::2] = v1 / eig.kappas
    return rhs


@dataclass(frozen=True, eq=False)
class MomentProblem:
    rhs: np.ndarray
    family: np.ndarray      # rows s_n(T - t) (or t for a zero mode) and c_n(T - t)
    t: np.ndarray
    weights: np.ndarray
    kappas: np.ndarray

    @property
    def T(self) -> float:
        return float(self.t[-1])

    def moments(self, g: np.ndarray) -> np.ndarray:
        """Discrete ``int g f_j dt`` for every family element."""
        return self.family @ (self.weights * g)


def build_moment_problem(model: ModalModel, target: TargetState) -> MomentProblem:
    eig = model.eig
    scale = _mode_scale(eig)
    family = np.empty((2 * eig.n_modes, len(model.t)))
    family[0::2] = (scale[:, None] * model.sigma)[:, ::-1]
    family[1::2] = model.c[:, ::-1]
    return MomentProblem(moment_coefficients(target, eig), family, model.t,
                         model.weights, eig.kappas)


@dataclass(frozen=True, eq=False)
class ControlSolution:
    t: np.ndarray
    g: np.ndarray
    f: np.ndarray | None
    achieved: np.ndarray     # kappa_n * int g f_j, interleaved
    requested: np.ndarray    # omega_n v0_n and v1_n, interleaved
    gram_condition: float
    svd_cutoff_used: float
    rank: int

    @property
    def residuals(self) -> np.ndarray:
        return np.abs(self.achieved - self.requested)

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals)) if self.residuals.size else 0.0


def synthesize_g(problem: MomentProblem, svd_cutoff: float = 1e-10) -> ControlSolution:
    """Least-norm ``g`` in the span of the family, via a truncated SVD of the Gram matrix."""
    fam = problem.family
    gram = (fam * problem.weights) @ fam.T
    u, s, vt = np.linalg.svd(gram)
    if s[0] == 0.0:
        keep = np.zeros_like(s, dtype=bool)
    else:
        keep = s > svd_cutoff * s[0]
    cond = float(s[0] / s[keep][-1]) if keep.any() else float("inf")
    if keep.any() and cond > MAX_GRAM_CONDITION:
        raise IllPosedError(
            f"Gram condition {cond:.3e} after cutoff; raise svd_cutoff or the horizon T")
    coef = vt[keep].T @ ((u[:, keep].T @ problem.rhs) / s[keep])
    g = fam.T @ coef
    kap = np.repeat(problem.kappas, 2)
    return ControlSolution(problem.t, g, None, kap * problem.moments(g), kap * problem.rhs,
                           cond if keep.any() else 1.0, svd_cutoff, int(keep.sum()))


# -- control map g = f + N * f ----------------------------------------------

def _trap_history(kern: np.ndarray, f: np.ndarray, dt: float) -> np.ndarray:
    """``dt (sum_{j<=k} N_{k-j} f_j - N_k f_0 / 2 - N_0 f_k / 2)`` for every k."""
    full = np.convolve(kern, f)[: len(f)]
    out = dt * (full - 0.5 * kern * f[0] - 0.5 * kern[0] * f)
    out[0] = 0.0
    return out


def forward_map(f: np.ndarray, kernel: MemoryKernel, dt: float) -> np.ndarray:
    """``g(t) = f(t) + int_0^t N(t - tau) f(tau) dtau`` by product trapezoid."""
    f = np.asarray(f, dtype=float)
    t = dt * np.arange(len(f))
    kern = np.asarray(kernel.N(t), dtype=float) + np.zeros_like(t)
    return f + _trap_history(kern, f, dt)


@numba.njit(cache=True)
def _volterra_solve(kern, g, dt):
    m = g.shape[0]
    f = np.zeros(m)
    f[0] = g[0]
    denom = 1.0 + 0.5 * dt * kern[0]
    for k in range(1, m):
        acc = 0.5 * kern[k] * f[0]
        for j in range(1, k):
            acc += kern[k - j] * f[j]
        f[k] = (g[k] - dt * acc) / denom
    return f


def recover_f(g: np.ndarray, kernel: MemoryKernel, dt: float) -> np.ndarray:
    """Invert ``f + N * f = g`` by product-trapezoidal marching."""
    g = np.ascontiguousarray(g, dtype=float)
    t = dt * np.arange(len(g))
    kern = np.ascontiguousarray(np.asarray(kernel.N(t), dtype=float) + np.zeros_like(t))
    return _volterra_solve(kern, g, dt)


def synthesize(model: ModalModel, target: TargetState,
               svd_cutoff: float = 1e-10) -> ControlSolution:
    """Moment problem, least-norm ``g`` and recovered physical control ``f``."""
    sol = synthesize_g(build_moment_problem(model, target), svd_cutoff)
    return replace(sol, f=recover_f(sol.g, model.kernel, model.dt))


__all__ = [
    "TargetState", "MomentProblem", "ControlSolution", "project_target",
    "moment_coefficients", "build_moment_problem", "synthesize_g", "synthesize",
    "forward_map", "recover_f", "time_grid",
]
