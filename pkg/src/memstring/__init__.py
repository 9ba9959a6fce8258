"""Boundary control of a non-homogeneous elastic string with memory.

Pipeline: eigensystem of the spatial operator, quasi-exponential families of
the memory-perturbed modal oscillators, a moment problem for the boundary
control, modal simulation to verify it, and basis/observability diagnostics.
"""
from .basis_diag import closeness_tail, gram_spectrum, observability_scan
from .medium import (ExponentialKernel, PolynomialKernel, RunConfig, SampledKernel,
                     StringMedium, ZeroKernel, load_config, optical_length)
from .model import ModalModel, build_model
from .moment import TargetState, recover_f, forward_map, synthesize
from .quasi_exp import closeness_report, integrate_family, laplace_oracle
from .simulator import simulate_dual, simulate_forward, verify_terminal
from .sturm_liouville import EigenSystem, solve_eigensystem

__version__ = "0.1.0"

__all__ = [
    "StringMedium", "ZeroKernel", "ExponentialKernel", "PolynomialKernel", "SampledKernel",
    "RunConfig", "load_config", "optical_length", "EigenSystem", "solve_eigensystem",
    "integrate_family", "closeness_report", "laplace_oracle", "ModalModel", "build_model",
    "TargetState", "synthesize", "forward_map", "recover_f", "simulate_forward",
    "simulate_dual", "verify_terminal", "gram_spectrum", "closeness_tail",
    "observability_scan",
]
