"""Per-mode deviation of the quasi-exponentials from exp(+-i w t + nu t).

    python3 scripts/closeness_table.py --a 0.4 --eta 1 --n-modes 32
"""
import argparse

from memstring.basis_diag import closeness_tail
from memstring.medium import ExponentialKernel, StringMedium
from memstring.quasi_exp import closeness_report
from memstring.sturm_liouville import solve_eigensystem


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--a", type=float, default=0.4)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--n-modes", type=int, default=32)
    p.add_argument("--horizon", type=float, default=2.0)
    p.add_argument("--dt", type=float, default=1e-3)
    args = p.parse_args()

    kernel = ExponentialKernel(args.a, args.eta)
    eig = solve_eigensystem(StringMedium.constant(), args.n_modes)
    rep = closeness_report(eig, kernel, args.horizon, args.dt)
    tail = closeness_tail(rep)
    print(f"{'n':>3} {'omega':>10} {'max|E+|':>10} {'n max|E|':>10} {'||E||^2':>10} {'sum':>10}")
    for i, n in enumerate(rep.modes):
        print(f"{n:3d} {eig.omegas[i].real:10.4f} {rep.max_plus[i]:10.3e} "
              f"{rep.scaled[i]:10.4f} {tail.increments[i]:10.3e} {tail.partial_sums[i]:10.3e}")
    print(f"slope of ||E_n||^2 over n in [8, 32]: {tail.slope:.3f}; converged: {tail.converged}")


if __name__ == "__main__":
    main()
