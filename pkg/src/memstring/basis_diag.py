"""Diagnostics for the quasi-exponential family: Gram conditioning, the
quadratic-closeness tail and sampled observability ratios.

These are finite-section evidence for infinite-dimensional statements; a
stable condition number under growing ``n_modes`` is what "Riesz basis"
means here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModalModel
from .quasi_exp import ClosenessReport, QuasiExpFamily
from .simulator import h_minus1_norm_sq, simulate_dual

TAIL_RTOL = 1e-3
TAIL_ATOL = 1e-20      # below this the partial sums are pure roundoff
SLOPE_WINDOW = (8, 32)


@dataclass(frozen=True, eq=False)
class GramSpectrum:
    T: float
    n_modes: int
    singular_values: np.ndarray    # descending
    condition: float

    @property
    def smallest(self) -> float:
        return float(self.singular_values[-1])

    def to_dict(self) -> dict:
        return {"T": self.T, "n_modes": self.n_modes,
                "singular_values": [float(s) for s in self.singular_values],
                "condition": self.condition}


def _condition(vals: np.ndarray) -> float:
    return float(vals[0] / vals[-1]) if vals[-1] > 0 else float("inf")


def family_matrix(families: list[QuasiExpFamily]) -> np.ndarray:
    """Rows ``e_n^+, e_n^-`` (``1, t`` for a zero mode), interleaved by mode."""
    rows = []
    for fam in families:
        rows.append(fam.e_plus)
        rows.append(fam.e_minus)
    return np.array(rows, dtype=complex)


def gram_matrix(rows: np.ndarray, weights: np.ndarray, normalize: bool = True) -> np.ndarray:
    """Trapezoidal ``G_jk = int f_j conj(f_k)``, optionally for unit-norm ``f_j``."""
    gram = (rows * weights) @ rows.conj().T
    gram = 0.5 * (gram + gram.conj().T)
    if normalize:
        d = np.sqrt(np.real(np.diag(gram)))
        gram = gram / np.outer(d, d)
    return gram


def gram_spectrum(model: ModalModel, n_modes: int | None = None, *,
                  normalize: bool = True) -> GramSpectrum:
    """Spectrum of the Gram matrix of the first ``n_modes`` families on ``(0, T)``.

    Hermitian PSD, so its eigenvalues are its singular values; roundoff
    negatives are clipped to zero.
    """
    n = model.n_modes if n_modes is None else n_modes
    if not 1 <= n <= model.n_modes:
        raise ValueError(f"n_modes must be in [1, {model.n_modes}], got {n}")
    gram = gram_matrix(family_matrix(model.families[:n]), model.weights, normalize)
    vals = np.clip(np.linalg.eigvalsh(gram)[::-1], 0.0, None)
    return GramSpectrum(float(model.T), n, vals, _condition(vals))


@dataclass(frozen=True, eq=False)
class TailReport:
    modes: np.ndarray
    increments: np.ndarray       # ||E_n^+||^2 + ||E_n^-||^2
    partial_sums: np.ndarray
    converged: bool
    slope: float                 # log-log slope of the increments over SLOPE_WINDOW

    @property
    def total(self) -> float:
        return float(self.partial_sums[-1])


def closeness_tail(report: ClosenessReport) -> TailReport:
    inc = np.asarray(report.l2sq_plus) + np.asarray(report.l2sq_minus)
    sums = np.cumsum(inc)
    converged = bool(sums[-1] <= TAIL_ATOL or inc[-1] < TAIL_RTOL * sums[-1])
    lo, hi = SLOPE_WINDOW
    sel = (report.modes >= lo) & (report.modes <= hi) & (inc > 0)
    if sel.sum() >= 2:
        slope = float(np.polyfit(np.log(report.modes[sel]), np.log(inc[sel]), 1)[0])
    else:
        slope = float("nan")
    return TailReport(np.asarray(report.modes), inc, sums, converged, slope)


@dataclass(frozen=True, eq=False)
class ObservabilityReport:
    T: float
    n_modes: int
    seed: int
    ratios: np.ndarray
    # extremal ratios over the whole truncated space, descending
    ratio_spectrum: np.ndarray

    @property
    def min_ratio(self) -> float:
        return float(np.min(self.ratios))

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratios))

    @property
    def condition(self) -> float:
        return _condition(self.ratio_spectrum)

    def to_dict(self) -> dict:
        return {"T": self.T, "n_modes": self.n_modes, "seed": self.seed,
                "singular_values": [float(s) for s in self.ratio_spectrum],
                "condition": self.condition,
                "min_ratio": self.min_ratio, "max_ratio": self.max_ratio}


def observability_ratio(model: ModalModel, v0: np.ndarray, v1: np.ndarray) -> float:
    """``||v(0, .)||^2_{L2(0,T)} / (||v0||^2_H + ||v1||^2_{H-1})``."""
    tr = simulate_dual(model, v0, v1)
    return tr.energy / (tr.norm_v0_sq + tr.norm_v1_sq)


def ratio_spectrum(model: ModalModel) -> np.ndarray:
    """Generalized eigenvalues of trace energy against the data norm, descending."""
    eig = model.eig
    basis = np.vstack([eig.phi0[:, None] * model.c, eig.phi0[:, None] * model.sigma])
    q = (basis * model.weights) @ basis.T
    d = np.concatenate([np.ones(eig.n_modes), 1.0 / (1.0 + np.abs(eig.lambdas))])
    s = 1.0 / np.sqrt(d)
    vals = np.linalg.eigvalsh(s[:, None] * q * s[None, :])[::-1]
    return np.clip(vals, 0.0, None)


def observability_scan(model: ModalModel, n_samples: int = 100,
                       seed: int = 0) -> ObservabilityReport:
    """Ratios for ``n_samples`` standard-normal data vectors, unit-normalized in
    ``H x H_{-1}``; draws are consumed in sample order so results depend only on ``seed``."""
    rng = np.random.default_rng(seed)
    n = model.n_modes
    ratios = np.empty(n_samples)
    for k in range(n_samples):
        v0, v1 = rng.standard_normal(n), rng.standard_normal(n)
        scale = np.sqrt(np.sum(v0 ** 2) + h_minus1_norm_sq(v1, model.eig.lambdas))
        ratios[k] = observability_ratio(model, v0 / scale, v1 / scale)
    return ObservabilityReport(float(model.T), n, int(seed), ratios, ratio_spectrum(model))


__all__ = [
    "GramSpectrum", "TailReport", "ObservabilityReport", "family_matrix", "gram_matrix",
    "gram_spectrum", "closeness_tail", "observability_ratio", "ratio_spectrum",
    "observability_scan",
]
