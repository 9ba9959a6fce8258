"""String material data, memory kernels and run configuration.

Coefficients rho, alpha, beta are piecewise cubic polynomials on a user mesh;
each segment stores ascending coefficients in the local variable
``x - mesh[i]``.  Memory kernels form a closed set of variants so that
closed-form derivatives (and the exponential-kernel pole analysis) stay
available.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .errors import CoefficientPositivityError, ConfigError, KernelDomainError

CONTINUITY_TOL = 1e-12
SLOPE_JUMP_TOL = 1e-6


class SmoothnessWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CoefficientFunction:
    mesh: tuple[float, ...]
    segments: tuple[tuple[float, float, float, float], ...]

    def __post_init__(self):
        mesh = tuple(float(m) for m in self.mesh)
        segs = []
        for seg in self.segments:
            seg = tuple(float(c) for c in seg)
            if len(seg) > 4:
                raise ConfigError(f"segments: degree above 3 in {seg}")
            segs.append(seg + (0.0,) * (4 - len(seg)))
        object.__setattr__(self, "mesh", mesh)
        object.__setattr__(self, "segments", tuple(segs))
        if len(mesh) < 2:
            raise ConfigError("mesh: need at least two breakpoints")
        if any(b <= a for a, b in zip(mesh, mesh[1:])):
            raise ConfigError("mesh: breakpoints must be strictly increasing")
        if len(segs) != len(mesh) - 1:
            raise ConfigError(
                f"segments: expected {len(mesh) - 1} segments, got {len(segs)}")
        for i in range(1, len(segs)):
            h = mesh[i] - mesh[i - 1]
            left = np.polyval(segs[i - 1][::-1], h)
            if abs(left - segs[i][0]) > CONTINUITY_TOL:
                raise ConfigError(
                    f"segments: value jump {left - segs[i][0]:.3e} at x={mesh[i]}")
            c = segs[i - 1]
            slope_left = c[1] + 2 * c[2] * h + 3 * c[3] * h * h
            if abs(slope_left - segs[i][1]) > SLOPE_JUMP_TOL:
                warnings.warn(
                    f"first-derivative jump {slope_left - segs[i][1]:.3e} at x={mesh[i]}",
                    SmoothnessWarning, stacklevel=3)

    @classmethod
    def constant(cls, value: float, length: float) -> "CoefficientFunction":
        return cls((0.0, float(length)), ((float(value), 0.0, 0.0, 0.0),))

    @classmethod
    def polynomial(cls, coeffs, length: float) -> "CoefficientFunction":
        """Single cubic segment ``sum c_k x^k`` on [0, length]."""
        return cls((0.0, float(length)), (tuple(coeffs),))

    @property
    def coefficients(self) -> np.ndarray:
        return np.array(self.segments, dtype=float)

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.mesh, x, side="right") - 1
        idx = np.clip(idx, 0, len(self.segments) - 1)
        return x, idx, x - np.asarray(self.mesh)[idx]

    def __call__(self, x):
        x, idx, h = self._locate(x)
        c = self.coefficients[idx]
        return c[..., 0] + h * (c[..., 1] + h * (c[..., 2] + h * c[..., 3]))

    def derivative(self, x):
        x, idx, h = self._locate(x)
        c = self.coefficients[idx]
        return c[..., 1] + h * (2 * c[..., 2] + 3 * h * c[..., 3])

    def scaled(self, factor: float) -> "CoefficientFunction":
        return CoefficientFunction(
            self.mesh, tuple(tuple(factor * c for c in s) for s in self.segments))

    def to_dict(self) -> dict:
        return {"mesh": list(self.mesh), "segments": [list(s) for s in self.segments]}


@dataclass(frozen=True)
class StringMedium:
    length: float
    rho: CoefficientFunction
    alpha: CoefficientFunction
    beta: CoefficientFunction

    def __post_init__(self):
        if not self.length > 0:
            raise ConfigError("medium.length: must be positive")
        for name in ("rho", "alpha", "beta"):
            mesh = getattr(self, name).mesh
            if abs(mesh[0]) > 0:
                raise ConfigError(f"medium.{name}.mesh: must start at 0")
            if abs(mesh[-1] - self.length) > 1e-12 * max(1.0, self.length):
                raise ConfigError(f"medium.{name}.mesh: must end at length {self.length}")
        xs = self.breakpoints()
        probe = np.unique(np.concatenate(
            [np.linspace(a, b, 9) for a, b in zip(xs, xs[1:])]))
        for name in ("rho", "alpha"):
            if np.any(getattr(self, name)(probe) <= 0):
                raise CoefficientPositivityError(
                    f"medium.{name}: must be strictly positive on [0, l]")

    @classmethod
    def constant(cls, rho=1.0, alpha=1.0, beta=0.0, length=1.0) -> "StringMedium":
        return cls(length, CoefficientFunction.constant(rho, length),
                   CoefficientFunction.constant(alpha, length),
                   CoefficientFunction.constant(beta, length))

    def breakpoints(self) -> np.ndarray:
        return np.unique(np.concatenate(
            [self.rho.mesh, self.alpha.mesh, self.beta.mesh]))

    def to_dict(self) -> dict:
        return {"length": self.length, "rho": self.rho.to_dict(),
                "alpha": self.alpha.to_dict(), "beta": self.beta.to_dict()}


def optical_length(medium: StringMedium) -> float:
    """Wave travel time ``L = int_0^l sqrt(rho/alpha) dx``.

    The control horizon is ``T0 = 2 L``.
    """
    def integrand(x):
        r, a = float(medium.rho(x)), float(medium.alpha(x))
        if r <= 0 or a <= 0:
            raise CoefficientPositivityError(
                f"non-positive coefficient at x={x}: rho={r}, alpha={a}")
        return math.sqrt(r / a)

    total = 0.0
    xs = medium.breakpoints()
    for a, b in zip(xs, xs[1:]):
        val, _ = integrate.quad(integrand, a, b, epsabs=0.0, epsrel=1e-12, limit=200)
        total += val
    return total


# -- memory kernels ---------------------------------------------------------

class MemoryKernel:
    """Common interface: ``N(t)``, ``dN(t)``, ``N0`` and ``nu = N0 / 2``."""

    kind = "abstract"

    def N(self, t):
        raise NotImplementedError

    def dN(self, t):
        raise NotImplementedError

    @property
    def N0(self) -> float:
        return float(self.N(0.0))

    @property
    def nu(self) -> float:
        return self.N0 / 2

    def check_domain(self, T: float) -> None:
        pass


@dataclass(frozen=True)
class ZeroKernel(MemoryKernel):
    kind = "zero"

    def N(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def dN(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def to_dict(self):
        return {"type": "zero"}


@dataclass(frozen=True)
class ExponentialKernel(MemoryKernel):
    """``N(t) = a exp(-eta t)``."""

    a: float
    eta: float
    kind = "exponential"

    def N(self, t):
        return self.a * np.exp(-self.eta * np.asarray(t, dtype=float))

    def dN(self, t):
        return -self.a * self.eta * np.exp(-self.eta * np.asarray(t, dtype=float))

    def to_dict(self):
        return {"type": "exponential", "a": self.a, "eta": self.eta}


@dataclass(frozen=True)
class PolynomialKernel(MemoryKernel):
    """``N(t) = sum_k coeffs[k] t^k``."""

    coeffs: tuple[float, ...]
    kind = "polynomial"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.coeffs:
            raise ConfigError("kernel.coeffs: must be non-empty")

    def N(self, t):
        return np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), self.coeffs)

    def dN(self, t):
        d = np.polynomial.polynomial.polyder(self.coeffs)
        return np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), d)

    def to_dict(self):
        return {"type": "polynomial", "coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class SampledKernel(MemoryKernel):
    """Cubic-spline interpolant of kernel samples."""

    grid: tuple[float, ...]
    values: tuple[float, ...]
    _spline: Any = field(default=None, init=False, repr=False, compare=False)
    kind = "sampled"

    def __post_init__(self):
        grid = tuple(float(g) for g in self.grid)
        values = tuple(float(v) for v in self.values)
        if len(grid) != len(values) or len(grid) < 4:
            raise ConfigError("kernel.grid/values: need >= 4 samples of equal length")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("kernel.grid: must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_spline", CubicSpline(grid, values))

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        tol = 1e-12 * max(1.0, abs(self.grid[-1]))
        if np.any(t < self.grid[0] - tol) or np.any(t > self.grid[-1] + tol):
            raise KernelDomainError(
                f"kernel evaluated outside sampled range [{self.grid[0]}, {self.grid[-1]}]")
        return np.clip(t, self.grid[0], self.grid[-1])

    def N(self, t):
        return self._spline(self._check(t))

    def dN(self, t):
        return self._spline(self._check(t), 1)

    def check_domain(self, T):
        if self.grid[0] > 0 or self.grid[-1] < T - 1e-12 * max(1.0, T):
            raise KernelDomainError(f"kernel.grid: must cover [0, {T}]")

    def to_dict(self):
        return {"type": "sampled", "grid": list(self.grid), "values": list(self.values)}


def eval_kernel(kernel: MemoryKernel, t: float) -> tuple[float, float]:
    return float(kernel.N(t)), float(kernel.dN(t))


# -- run configuration ------------------------------------------------------

@dataclass(frozen=True)
class ControlSpec:
    """Reference boundary control ``f``: sine, constant or explicit samples."""

    kind: str = "sine"
    amplitude: float = 1.0
    frequency: float = math.pi
    phase: float = 0.0
    value: float = 0.0
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("sine", "constant", "samples"):
            raise ConfigError(f"control.type: unknown control type {self.kind!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def sample(self, t: np.ndarray) -> np.ndarray:
        if self.kind == "sine":
            return self.amplitude * np.sin(self.frequency * t + self.phase)
        if self.kind == "constant":
            return np.full_like(t, self.value, dtype=float)
        if len(self.values) != len(t):
            raise ConfigError(
                f"control.values: {len(self.values)} samples for a grid of {len(t)}")
        return np.array(self.values)

    def to_dict(self):
        if self.kind == "sine":
            return {"type": "sine", "amplitude": self.amplitude,
                    "frequency": self.frequency, "phase": self.phase}
        if self.kind == "constant":
            return {"type": "constant", "value": self.value}
        return {"type": "samples", "values": list(self.values)}


@dataclass(frozen=True)
class TargetSpec:
    """Terminal state description.

    ``reachable`` means the state reached by the configured control;
    ``coefficients`` gives eigen-coefficients; ``samples`` gives v0, v1 on x.
    """

    kind: str = "reachable"
    v0: tuple[float, ...] = ()
    v1: tuple[float, ...] = ()
    x: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("reachable", "zero", "coefficients", "samples"):
            raise ConfigError(f"target.type: unknown target type {self.kind!r}")
        for name in ("v0", "v1", "x"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if self.kind == "coefficients" and len(self.v0) != len(self.v1):
            raise ConfigError("target.v0/v1: coefficient lists differ in length")
        if self.kind == "samples" and not (len(self.x) == len(self.v0) == len(self.v1) >= 4):
            raise ConfigError("target.x/v0/v1: need >= 4 samples of equal length")

    def to_dict(self):
        d: dict[str, Any] = {"type": self.kind}
        if self.kind in ("coefficients", "samples"):
            d["v0"], d["v1"] = list(self.v0), list(self.v1)
        if self.kind == "samples":
            d["x"] = list(self.x)
        return d


@dataclass(frozen=True)
class RunConfig:
    medium: StringMedium
    kernel: MemoryKernel
    horizon: float
    n_modes: int = 16
    dt: float = 1e-3
    svd_cutoff: float = 1e-10
    target: TargetSpec = TargetSpec()
    control: ControlSpec = ControlSpec()
    n_samples: int = 100
    seed: int = 0

    def __post_init__(self):
        if not self.horizon > 0:
            raise ConfigError("horizon: must be positive")
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ConfigError("n_modes: must be a positive integer")
        if not self.dt > 0:
            raise ConfigError("dt: must be positive")
        if self.dt > self.horizon / 100 * (1 + 1e-12):
            raise ConfigError(f"dt: must be <= horizon/100 = {self.horizon / 100}")
        steps = self.horizon / self.dt
        if abs(steps - round(steps)) > 1e-9 * steps:
            raise ConfigError("dt: horizon must be an integer multiple of dt")
        if not 0 < self.svd_cutoff < 1:
            raise ConfigError("svd_cutoff: must lie in (0, 1)")
        if self.n_samples < 1:
            raise ConfigError("n_samples: must be positive")
        self.kernel.check_domain(self.horizon)

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))

    def to_dict(self) -> dict:
        return {"medium": self.medium.to_dict(), "kernel": self.kernel.to_dict(),
                "horizon": self.horizon, "n_modes": self.n_modes, "dt": self.dt,
                "svd_cutoff": self.svd_cutoff, "target": self.target.to_dict(),
                "control": self.control.to_dict(), "n_samples": self.n_samples,
                "seed": self.seed}


def serialize_config(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ConfigError(f"{where}{key}: missing required field")
    return doc[key]


def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{name}: must be finite")
    return float(value)


def _numbers(value, name: str) -> list[float]:
    if not isinstance(value, list):
        raise ConfigError(f"{name}: expected a list of numbers")
    return [_number(v, f"{name}[{i}]") for i, v in enumerate(value)]


def _parse_coefficient(doc, name: str, length: float, default: float) -> CoefficientFunction:
    if doc is None:
        return CoefficientFunction.constant(default, length)
    if not isinstance(doc, dict):
        raise ConfigError(f"{name}: expected an object")
    if "const" in doc:
        return CoefficientFunction.constant(_number(doc["const"], f"{name}.const"), length)
    mesh = _numbers(_require(doc, "mesh", f"{name}."), f"{name}.mesh")
    if not mesh or mesh[0] != 0.0:
        raise ConfigError(f"{name}.mesh: must start at 0")
    if abs(mesh[-1] - length) > 1e-12 * max(1.0, length):
        raise ConfigError(f"{name}.mesh: must end at length {length}")
    if any(b <= a for a, b in zip(mesh, mesh[1:])):
        raise ConfigError(f"{name}.mesh: breakpoints must be strictly increasing")
    segs = _require(doc, "segments", f"{name}.")
    if not isinstance(segs, list):
        raise ConfigError(f"{name}.segments: expected a list")
    segs = [_numbers(s, f"{name}.segments[{i}]") for i, s in enumerate(segs)]
    try:
        return CoefficientFunction(tuple(mesh), tuple(tuple(s) for s in segs))
    except ConfigError as exc:
        raise ConfigError(f"{name}.{exc}") from None


def parse_kernel(doc) -> MemoryKernel:
    if doc is None:
        return ZeroKernel()
    if not isinstance(doc, dict):
        raise ConfigError("kernel: expected an object")
    kind = doc.get("type", "zero")
    if kind == "zero":
        return ZeroKernel()
    if kind == "exponential":
        return ExponentialKernel(_number(_require(doc, "a", "kernel."), "kernel.a"),
                                 _number(_require(doc, "eta", "kernel."), "kernel.eta"))
    if kind == "polynomial":
        return PolynomialKernel(tuple(_numbers(_require(doc, "coeffs", "kernel."),
                                               "kernel.coeffs")))
    if kind == "sampled":
        return SampledKernel(tuple(_numbers(_require(doc, "grid", "kernel."), "kernel.grid")),
                             tuple(_numbers(_require(doc, "values", "kernel."),
                                            "kernel.values")))
    raise ConfigError(f"kernel.type: unknown kernel type {kind!r}")


_TOP_KEYS = {"medium", "kernel", "horizon", "n_modes", "dt", "svd_cutoff", "target",
             "control", "n_samples", "seed"}


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be an object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown top-level key")
    mdoc = _require(doc, "medium", "")
    if not isinstance(mdoc, dict):
        raise ConfigError("medium: expected an object")
    length = _number(_require(mdoc, "length", "medium."), "medium.length")
    if length <= 0:
        raise ConfigError("medium.length: must be positive")
    medium = StringMedium(
        length,
        _parse_coefficient(mdoc.get("rho"), "rho", length, 1.0),
        _parse_coefficient(mdoc.get("alpha"), "alpha", length, 1.0),
        _parse_coefficient(mdoc.get("beta"), "beta", length, 0.0),
    )
    kernel = parse_kernel(doc.get("kernel"))
    horizon = doc.get("horizon")
    horizon = 2 * optical_length(medium) if horizon is None else _number(horizon, "horizon")

    n_modes = doc.get("n_modes", 16)
    if isinstance(n_modes, bool) or not isinstance(n_modes, int):
        raise ConfigError("n_modes: expected an integer")
    n_samples = doc.get("n_samples", 100)
    seed = doc.get("seed", 0)
    for name, val in (("n_samples", n_samples), ("seed", seed)):
        if isinstance(val, bool) or not isinstance(val, int) or val < 0:
            raise ConfigError(f"{name}: expected a non-negative integer")

    tdoc = doc.get("target") or {"type": "reachable"}
    if not isinstance(tdoc, dict):
        raise ConfigError("target: expected an object")
    target = TargetSpec(tdoc.get("type", "coefficients"),
                        tuple(_numbers(tdoc.get("v0", []), "target.v0")),
                        tuple(_numbers(tdoc.get("v1", []), "target.v1")),
                        tuple(_numbers(tdoc.get("x", []), "target.x")))
    if target.kind == "samples":
        if target.x[0] != 0.0 or abs(target.x[-1] - length) > 1e-12 * max(1.0, length):
            raise ConfigError("target.x: must span [0, length]")
        if abs(target.v0[-1]) > 1e-8:
            raise ConfigError("target.v0: must vanish at x = length")

    cdoc = doc.get("control") or {"type": "sine"}
    if not isinstance(cdoc, dict):
        raise ConfigError("control: expected an object")
    ckind = cdoc.get("type", "sine")
    control = ControlSpec(
        ckind,
        _number(cdoc.get("amplitude", 1.0), "control.amplitude"),
        _number(cdoc.get("frequency", math.pi), "control.frequency"),
        _number(cdoc.get("phase", 0.0), "control.phase"),
        _number(cdoc.get("value", 0.0), "control.value"),
        tuple(_numbers(cdoc.get("values", []), "control.values")),
    )
    return RunConfig(
        medium=medium, kernel=kernel, horizon=horizon, n_modes=n_modes,
        dt=_number(doc.get("dt", 1e-3), "dt"),
        svd_cutoff=_number(doc.get("svd_cutoff", 1e-10), "svd_cutoff"),
        target=target, control=control, n_samples=n_samples, seed=seed,
    )


def parse_document(source: Union[str, Path, dict]) -> dict:
    if isinstance(source, dict):
        return source
    if isinstance(source, Path) or not str(source).lstrip().startswith("{"):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = str(source)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: malformed JSON ({exc})") from None


def load_config(source: Union[str, Path, dict]) -> RunConfig:
    """Parse and validate a JSON config given as a path, JSON text or dict."""
    return config_from_dict(parse_document(source))
