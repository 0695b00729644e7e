"""Independent reference computations shared by several test modules."""

import itertools
import math

import numpy as np
from scipy import integrate


def two_symbol_leakage(g1, g3, E, v=1.0):
    """I(Y1 Y2; M1) for a binary two-player code with n = 2, k = k' = 1.

    Codewords are rebuilt from the raw generator arrays, and both output
    entropies are integrated with scipy's adaptive 2-D quadrature.
    """
    g1, g3 = np.asarray(g1), np.asarray(g3)

    def word(m, l):
        return (g1 @ ((g3 @ np.array([m, l])) % 2)) % 2

    by_m1 = {}
    for m1, l1, m2, l2 in itertools.product(range(2), repeat=4):
        by_m1.setdefault(m1, []).append(E * (word(m1, l1) + word(m2, l2)))
    lo, hi = -9 * math.sqrt(v), 4 * E + 9 * math.sqrt(v)

    def entropy(mus):
        mus = np.asarray(mus, dtype=float)

        def f(y2, y1):
            d = (y1 - mus[:, 0]) ** 2 + (y2 - mus[:, 1]) ** 2
            p = np.mean(np.exp(-d / (2 * v))) / (2 * math.pi * v)
            return -p * math.log(p) if p > 0 else 0.0

        return integrate.dblquad(f, lo, hi, lo, hi, epsabs=1e-10)[0]

    every = [mu for mus in by_m1.values() for mu in mus]
    return entropy(every) - 0.5 * sum(entropy(mus) for mus in by_m1.values())
