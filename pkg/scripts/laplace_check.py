"""Integrated quasi-exponentials against the exact three-pole solution for
N(t) = a exp(-eta t), over modes and time steps.

The difference is pure discretization error; the table shows its
omega^2 dt^2 scaling next to the O(1/omega) deviation from exp(i w t + nu t).

    python3 scripts/laplace_check.py --modes 1 4 8 16 32 --dts 2e-3 1e-3 5e-4
"""
import argparse
import math

import numpy as np

from memstring.medium import ExponentialKernel
from memstring.quasi_exp import (asymptotic_reference, exponential_kernel_poles,
                                 integrate_family, laplace_oracle)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--a", type=float, default=0.4)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--horizon", type=float, default=2.0)
    p.add_argument("--modes", type=int, nargs="+", default=[1, 4, 8, 16, 32])
    p.add_argument("--dts", type=float, nargs="+", default=[2e-3, 1e-3, 5e-4])
    args = p.parse_args()

    kernel = ExponentialKernel(args.a, args.eta)
    print(f"{'n':>3} {'omega':>9} {'Re p12':>8} {'p3':>8} {'dt':>8} {'max|e - exact|':>15} "
          f"{'/ (w dt)^2':>10} {'n max|exact - ref|':>18}")
    for n in args.modes:
        om = math.pi * (n - 0.5)
        poles = exponential_kernel_poles(args.a, args.eta, om)
        for dt in args.dts:
            fam = integrate_family(om, kernel, args.horizon, dt)
            ep, _ = laplace_oracle(args.a, args.eta, om, fam.grid)
            err = np.max(np.abs(fam.e_plus - ep))
            ref, _ = asymptotic_reference(om, kernel.nu, fam.grid)
            dev = n * np.max(np.abs(ep - ref))
            print(f"{n:3d} {om:9.4f} {poles[0].real:8.4f} {poles[1].real:8.4f} {dt:8.1e} "
                  f"{err:15.3e} {err / (om * dt) ** 2:10.4f} {dev:18.4f}")


if __name__ == "__main__":
    main()
