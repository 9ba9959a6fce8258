"""Eigensystem plus quasi-exponential families on one uniform time grid."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .medium import MemoryKernel, StringMedium
from .quasi_exp import QuasiExpFamily, integrate_families, time_grid, trapezoid_weights
from .sturm_liouville import EigenSystem, solve_eigensystem


@dataclass(frozen=True, eq=False)
class ModalModel:
    eig: EigenSystem
    kernel: MemoryKernel
    T: float
    dt: float
    t: np.ndarray
    families: list[QuasiExpFamily]

    @property
    def n_modes(self) -> int:
        return self.eig.n_modes

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(len(self.t), self.dt)

    @property
    def c(self) -> np.ndarray:
        """``c_n(t)`` stacked by mode.  Real for real kernels, even for imaginary omega."""
        return np.array([f.c.real for f in self.families])

    @property
    def sigma(self) -> np.ndarray:
        """``s_n(t) / omega_n`` stacked by mode (``t`` for a zero mode)."""
        return np.array([f.s_over_omega.real for f in self.families])

    def with_horizon(self, T: float) -> "ModalModel":
        return build_model(self.eig, self.kernel, T, self.dt)


def build_model(medium_or_eig, kernel: MemoryKernel, T: float, dt: float,
                n_modes: int | None = None, threads: int = 1) -> ModalModel:
    """Solve (or reuse) the eigensystem and integrate every mode's family on [0, T]."""
    if isinstance(medium_or_eig, StringMedium):
        if n_modes is None:
            raise ValueError("n_modes is required when building from a medium")
        eig = solve_eigensystem(medium_or_eig, n_modes, threads=threads)
    else:
        eig = medium_or_eig
    kernel.check_domain(T)
    t = time_grid(T, dt)
    families = integrate_families(eig.omegas, kernel, T, dt, threads)
    return ModalModel(eig, kernel, T, dt, t, families)
