"""Control round trip: simulate a reference control, steer to the state it reaches,
re-simulate the synthesized control and report the terminal errors.

    python3 scripts/roundtrip_demo.py --a 0.4 --n-modes 32 --out /tmp/rt
"""
import argparse
import math
from pathlib import Path

import numpy as np

from memstring.medium import ExponentialKernel, StringMedium, ZeroKernel
from memstring.model import build_model
from memstring.moment import TargetState, synthesize
from memstring.simulator import simulate_forward, verify_terminal


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--a", type=float, default=0.4)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--n-modes", type=int, default=32)
    p.add_argument("--horizon", type=float, default=2.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--cutoff", type=float, default=1e-10)
    p.add_argument("--out", type=Path, help="write t, f_ref, g, f to this directory")
    args = p.parse_args()

    kernel = ExponentialKernel(args.a, args.eta) if args.a else ZeroKernel()
    model = build_model(StringMedium.constant(), kernel, args.horizon, args.dt,
                        n_modes=args.n_modes)
    f_ref = np.sin(math.pi * model.t)
    ref = simulate_forward(model, f_ref)
    target = TargetState.from_coefficients(ref.a[:, -1], ref.adot[:, -1])
    sol = synthesize(model, target, args.cutoff)
    errs = verify_terminal(simulate_forward(model, sol.f), target)
    print(f"modes={args.n_modes} T={args.horizon} dt={args.dt} kernel a={args.a} eta={args.eta}")
    print(f"gram condition {sol.gram_condition:.4g}, rank {sol.rank}, "
          f"max moment residual {sol.max_residual:.3e}")
    print(f"e0 = {errs['e0']:.3e}, e1 = {errs['e1']:.3e}")
    print(f"||f||_L2 = {math.sqrt(np.sum(model.weights * sol.f ** 2)):.6f}, "
          f"||f_ref||_L2 = {math.sqrt(np.sum(model.weights * f_ref ** 2)):.6f}")
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        np.savetxt(args.out / "controls.csv", np.column_stack([model.t, f_ref, sol.g, sol.f]),
                   fmt="%.17g", delimiter=",", header="t,f_ref,g,f", comments="")


if __name__ == "__main__":
    main()
