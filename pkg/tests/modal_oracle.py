"""Independent direct time-stepper for one memory-perturbed modal equation.

    a'' + w^2 a + w^2 int_0^t N(t - s) a(s) ds = F(t)

Implicit trapezoid for the first-order system with the memory integral
taken by product trapezoid, implicit in the new node.  Deliberately a
different scheme from the package's integrator.
"""
import numpy as np


def modal_oracle(omega, kern_fn, force_fn, T, h, a0=0.0, v0=0.0):
    m = int(round(T / h))
    t = h * np.arange(m + 1)
    kern = kern_fn(t) + np.zeros_like(t)
    force = force_fn(t) + np.zeros_like(t)
    a = np.zeros(m + 1)
    v = np.zeros(m + 1)
    a[0], v[0] = a0, v0
    w2 = omega ** 2
    beta = 0.5 * h * kern[0]
    j_old = 0.0
    for k in range(m):
        hist = h * (0.5 * kern[k + 1] * a[0] + np.dot(kern[k:0:-1], a[1:k + 1]))
        rhs0 = -w2 * a[k] - w2 * j_old + force[k]
        num = a[k] + h * v[k] + h * h / 4 * (rhs0 - w2 * hist + force[k + 1])
        a[k + 1] = num / (1 + h * h / 4 * w2 * (1 + beta))
        j_new = hist + beta * a[k + 1]
        v[k + 1] = v[k] + h / 2 * (rhs0 - w2 * a[k + 1] - w2 * j_new + force[k + 1])
        j_old = j_new
    return t, a, v
