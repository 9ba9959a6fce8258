"""Command-line front end: ``memstring <command> [--config C] [--out D] ...``.

Exit status 0 on success, 1 on invalid input, 2 on numerical failure; every
failure prints one ``error: <kind>: <reason>`` line on stderr.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .basis_diag import gram_spectrum, observability_scan
from .errors import ConfigError, NumericalError
from .medium import RunConfig, config_from_dict, parse_document
from .model import ModalModel, build_model
from .moment import TargetState, project_target, synthesize
from .quasi_exp import asymptotic_reference
from .simulator import simulate_dual, simulate_forward, verify_terminal
from .sturm_liouville import asymptotic_gap, solve_eigensystem

COMMANDS = ("eig", "quasi", "gram", "synthesize", "simulate", "observe",
            "observe-scan", "roundtrip")

DEFAULT_CONFIG = {"medium": {"length": 1.0}}

_COEF_KEYS = {"const": None, "mesh": None, "segments": None}
# allowed --set paths; None marks a leaf
SCHEMA = {
    "medium": {"length": None, "rho": _COEF_KEYS, "alpha": _COEF_KEYS, "beta": _COEF_KEYS},
    "kernel": {"type": None, "a": None, "eta": None, "coeffs": None, "grid": None,
               "values": None},
    "horizon": None, "n_modes": None, "dt": None, "svd_cutoff": None,
    "target": {"type": None, "v0": None, "v1": None, "x": None},
    "control": {"type": None, "amplitude": None, "frequency": None, "phase": None,
                "value": None, "values": None},
    "n_samples": None, "seed": None,
}


class UsageError(ConfigError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="memstring", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path, help="JSON run configuration")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE", help="dotted-key override, repeatable")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--threads", type=int, default=1)
    return p


def apply_override(doc: dict, item: str) -> None:
    """Set ``a.b.c=value`` in ``doc``; the value is parsed as JSON when possible."""
    key, sep, raw = item.partition("=")
    if not sep or not key:
        raise UsageError(f"--set {item!r}: expected KEY=VALUE")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    parts = key.split(".")
    schema, node = SCHEMA, doc
    for i, part in enumerate(parts):
        if not isinstance(schema, dict) or part not in schema:
            raise UsageError(f"--set: unknown key {key!r}")
        schema = schema[part]
        if i == len(parts) - 1:
            node[part] = value
        else:
            if not isinstance(node.get(part), dict):
                node[part] = {}
            node = node[part]


def resolve_config(args) -> RunConfig:
    doc = parse_document(args.config) if args.config else json.loads(json.dumps(DEFAULT_CONFIG))
    for item in args.overrides:
        apply_override(doc, item)
    if args.seed is not None:
        if args.seed < 0 or args.seed >= 2 ** 64:
            raise UsageError("--seed: must be an unsigned 64-bit integer")
        doc["seed"] = args.seed
    if args.threads < 1:
        raise UsageError("--threads: must be positive")
    return config_from_dict(doc)


# -- writers ------------------------------------------------------------------

def _check_finite(name: str, *arrays) -> None:
    for arr in arrays:
        if not np.all(np.isfinite(np.asarray(arr, dtype=complex))):
            raise NumericalError(f"{name}: non-finite value in output")


def write_csv(path: Path, header: list[str], columns: list) -> None:
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    _check_finite(path.name, data)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, data, fmt="%.17g", delimiter=",", newline="\n")


def _finite_json(obj, name: str):
    if isinstance(obj, float) and not math.isfinite(obj):
        raise NumericalError(f"{name}: non-finite value in output")
    if isinstance(obj, dict):
        for v in obj.values():
            _finite_json(v, name)
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            _finite_json(v, name)


def write_json(path: Path, obj: dict) -> None:
    _finite_json(obj, path.name)
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
    path.write_text(text, encoding="utf-8", newline="\n")


# -- pipeline pieces ------------------------------------------------------------

def _model(cfg: RunConfig, threads: int) -> ModalModel:
    return build_model(cfg.medium, cfg.kernel, cfg.horizon, cfg.dt, cfg.n_modes, threads)


def _target(cfg: RunConfig, model: ModalModel) -> TargetState:
    spec = cfg.target
    if spec.kind == "reachable":
        traj = simulate_forward(model, cfg.control.sample(model.t))
        return TargetState.from_coefficients(traj.a[:, -1], traj.adot[:, -1])
    if spec.kind == "zero":
        return TargetState.zero(model.n_modes)
    if spec.kind == "coefficients":
        return TargetState.from_coefficients(spec.v0, spec.v1)
    return TargetState.from_samples(spec.x, spec.v0, spec.v1)


def cmd_eig(cfg, args):
    eig = solve_eigensystem(cfg.medium, cfg.n_modes, threads=args.threads)
    n = np.arange(1, eig.n_modes + 1)
    write_csv(args.out / "eig.csv",
              ["n", "lambda", "re_omega", "im_omega", "phi0", "kappa", "gap"],
              [n, eig.lambdas, eig.omegas.real, eig.omegas.imag, eig.phi0, eig.kappas,
               asymptotic_gap(eig)])


def cmd_quasi(cfg, args):
    model = _model(cfg, args.threads)
    nu = cfg.kernel.nu
    header = ["t", "re_c", "im_c", "re_s", "im_s", "re_e_plus", "im_e_plus",
              "re_e_minus", "im_e_minus", "re_ref_plus", "im_ref_plus",
              "re_ref_minus", "im_ref_minus", "abs_E_plus", "abs_E_minus"]
    for k, fam in enumerate(model.families, start=1):
        if fam.is_zero_mode:
            ref_p, ref_m = np.exp(nu * fam.grid), fam.grid * np.exp(nu * fam.grid)
        else:
            ref_p, ref_m = asymptotic_reference(fam.omega, nu, fam.grid)
        ep, em = fam.e_plus, fam.e_minus
        cols = [fam.grid]
        for z in (fam.c, fam.s, ep, em, ref_p, ref_m):
            cols += [z.real, z.imag]
        cols += [np.abs(ep - ref_p), np.abs(em - ref_m)]
        write_csv(args.out / f"quasi_{k:03d}.csv", header, cols)


def cmd_gram(cfg, args):
    spec = gram_spectrum(_model(cfg, args.threads))
    out = spec.to_dict()
    # for the Gram, the Riesz-bound pair plays the role of the ratio extremes
    out.update(min_ratio=float(spec.singular_values[-1]),
               max_ratio=float(spec.singular_values[0]), seed=cfg.seed)
    write_json(args.out / "gram.json", out)


def cmd_synthesize(cfg, args):
    model = _model(cfg, args.threads)
    sol = synthesize(model, _target(cfg, model), cfg.svd_cutoff)
    write_csv(args.out / "g.csv", ["t", "value"], [sol.t, sol.g])
    write_csv(args.out / "f.csv", ["t", "value"], [sol.t, sol.f])
    write_json(args.out / "report.json",
               {"gram_condition": sol.gram_condition, "max_residual": sol.max_residual,
                "cutoff": sol.svd_cutoff_used, "modes": model.n_modes})


def cmd_simulate(cfg, args):
    model = _model(cfg, args.threads)
    traj = simulate_forward(model, cfg.control.sample(model.t))
    write_csv(args.out / "trajectory.csv", ["t", "y_norm_H1_sq", "ydot_norm_H_sq"],
              [traj.t, traj.y_norm_H1_sq, traj.ydot_norm_H_sq])
    write_csv(args.out / "terminal.csv", ["n", "a", "adot"],
              [traj.modes, traj.a[:, -1], traj.adot[:, -1]])


def cmd_observe(cfg, args):
    model = _model(cfg, args.threads)
    v0, v1 = project_target(_target(cfg, model), model.eig)
    tr = simulate_dual(model, v0, v1)
    write_csv(args.out / "trace.csv", ["t", "trace"], [tr.t, tr.trace])


def cmd_observe_scan(cfg, args):
    rep = observability_scan(_model(cfg, args.threads), cfg.n_samples, cfg.seed)
    write_json(args.out / "observe_scan.json", rep.to_dict())


def cmd_roundtrip(cfg, args):
    model = _model(cfg, args.threads)
    ref = simulate_forward(model, cfg.control.sample(model.t))
    target = TargetState.from_coefficients(ref.a[:, -1], ref.adot[:, -1])
    sol = synthesize(model, target, cfg.svd_cutoff)
    errs = verify_terminal(simulate_forward(model, sol.f), target)
    write_json(args.out / "roundtrip.json",
               {**errs, "gram_condition": sol.gram_condition,
                "max_residual": sol.max_residual, "modes": model.n_modes,
                "T": model.T, "dt": model.dt})


HANDLERS = {
    "eig": cmd_eig, "quasi": cmd_quasi, "gram": cmd_gram, "synthesize": cmd_synthesize,
    "simulate": cmd_simulate, "observe": cmd_observe, "observe-scan": cmd_observe_scan,
    "roundtrip": cmd_roundtrip,
}


def _fail(kind: str, exc: BaseException, status: int) -> int:
    reason = " ".join(str(exc).split()) or type(exc).__name__
    print(f"error: {kind}: {reason}", file=sys.stderr)
    return status


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        args.out.mkdir(parents=True, exist_ok=True)
        HANDLERS[args.command](cfg, args)
    except UsageError as exc:
        return _fail("usage", exc, 1)
    except ValueError as exc:
        return _fail("config", exc, 1)
    except NumericalError as exc:
        return _fail("numerical", exc, 2)
    except OSError as exc:
        return _fail("io", exc, 1)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
