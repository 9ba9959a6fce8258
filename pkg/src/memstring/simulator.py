"""Modal simulation of the controlled string and of the observed dual system."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError
from .model import ModalModel
from .moment import TargetState, _trap_history, forward_map, project_target

ZERO_TARGET_RTOL = 1e-10


@dataclass(frozen=True)
class StateSnapshot:
    t: float
    a: np.ndarray
    adot: np.ndarray
    # sum n^2 |a_n|^2: equivalent to, not equal to, the squared H1 norm
    y_norm_H1_sq: float
    ydot_norm_H_sq: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    a: np.ndarray       # (n_modes, n_t)
    adot: np.ndarray

    @property
    def modes(self) -> np.ndarray:
        return np.arange(1, self.a.shape[0] + 1)

    @property
    def y_norm_H1_sq(self) -> np.ndarray:
        return np.sum(self.modes[:, None] ** 2 * np.abs(self.a) ** 2, axis=0)

    @property
    def ydot_norm_H_sq(self) -> np.ndarray:
        return np.sum(np.abs(self.adot) ** 2, axis=0)

    def snapshot(self, k: int = -1) -> StateSnapshot:
        a, adot = self.a[:, k].copy(), self.adot[:, k].copy()
        return StateSnapshot(float(self.t[k]), a, adot,
                             float(np.sum(self.modes ** 2 * np.abs(a) ** 2)),
                             float(np.sum(np.abs(adot) ** 2)))

    @property
    def terminal(self) -> StateSnapshot:
        return self.snapshot(-1)


def _check_grid(model: ModalModel, samples: np.ndarray) -> np.ndarray:
    samples = np.asarray(samples, dtype=float)
    if samples.shape != model.t.shape:
        raise GridMismatchError(
            f"control has {samples.shape} samples, model grid has {model.t.shape}; "
            "resample onto the model grid")
    return samples


def modal_response(model: ModalModel, g: np.ndarray) -> Trajectory:
    """``a_n = kappa_n (g * s_n/omega_n)``, ``a_n' = kappa_n (g * c_n)``."""
    g = _check_grid(model, g)
    kap = model.eig.kappas
    sig, c = model.sigma, model.c
    a = np.array([k * _trap_history(s, g, model.dt) for k, s in zip(kap, sig)])
    adot = np.array([k * _trap_history(cc, g, model.dt) for k, cc in zip(kap, c)])
    return Trajectory(model.t, a, adot)


def simulate_forward(model: ModalModel, f: np.ndarray) -> Trajectory:
    """Zero-initial-data response to the boundary control ``f`` sampled on ``model.t``."""
    f = _check_grid(model, f)
    return modal_response(model, forward_map(f, model.kernel, model.dt))


def verify_terminal(traj: Trajectory, target: TargetState | tuple,
                    eig=None) -> dict[str, float]:
    """Relative terminal errors in the ``sum n^2 |.|^2`` and ``sum |.|^2`` metrics.

    A component whose target norm is below ``ZERO_TARGET_RTOL`` times the
    combined target norm counts as zero and is compared in absolute terms.
    """
    if isinstance(target, TargetState):
        if target.x is not None:
            if eig is None:
                raise ValueError("spatial targets need the eigensystem")
            v0, v1 = project_target(target, eig)
        else:
            v0, v1 = target.padded(traj.a.shape[0])
    else:
        v0, v1 = (np.asarray(v, dtype=float) for v in target)
    n2 = traj.modes ** 2
    d0 = np.sqrt(np.sum(n2 * np.abs(traj.a[:, -1] - v0) ** 2))
    d1 = np.sqrt(np.sum(np.abs(traj.adot[:, -1] - v1) ** 2))
    r0 = np.sqrt(np.sum(n2 * np.abs(v0) ** 2))
    r1 = np.sqrt(np.sum(np.abs(v1) ** 2))
    floor = ZERO_TARGET_RTOL * math.hypot(r0, r1)
    return {"e0": float(d0 / r0 if r0 > floor else d0),
            "e1": float(d1 / r1 if r1 > floor else d1)}


def h_minus1_norm_sq(v1: np.ndarray, lambdas: np.ndarray) -> float:
    """Diagonal spectral surrogate ``sum |v1_n|^2 / (1 + |lam_n|)`` for the H_{-1} norm."""
    return float(np.sum(np.abs(v1) ** 2 / (1.0 + np.abs(lambdas))))


@dataclass(frozen=True, eq=False)
class DualTrace:
    t: np.ndarray
    trace: np.ndarray
    norm_v0_sq: float
    norm_v1_sq: float     # H_{-1} surrogate

    @property
    def energy(self) -> float:
        w = np.full(len(self.t), self.t[1] - self.t[0])
        w[0] = w[-1] = w[0] / 2
        return float(np.sum(w * np.abs(self.trace) ** 2))


def simulate_dual(model: ModalModel, v0: np.ndarray, v1: np.ndarray) -> DualTrace:
    """Boundary trace ``v(0, t) = sum_n (v0_n c_n + v1_n s_n/omega_n) phi_n(0)``."""
    eig = model.eig
    v0 = np.asarray(v0, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    trace = (v0 * eig.phi0) @ model.c + (v1 * eig.phi0) @ model.sigma
    return DualTrace(model.t, trace, float(np.sum(v0 ** 2)), h_minus1_norm_sq(v1, eig.lambdas))
