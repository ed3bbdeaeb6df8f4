"""Independent reference computations used by the tests.

These deliberately avoid the package's vectorized code paths: plain loops
and closed forms only.
"""

import cmath
import itertools
import math

import numpy as np


def double_sum_response(q_y, q_z, d_y, d_z, phases, beta_y, beta_z):
    """sum over (q_y, q_z) of exp(j(2 pi d_y beta_y q_y + 2 pi d_z beta_z q_z + nu))."""
    total = 0j
    for iy in range(q_y):
        for iz in range(q_z):
            nu = phases[iy * q_z + iz]
            total += cmath.exp(1j * (2 * math.pi * d_y * beta_y * iy + 2 * math.pi * d_z * beta_z * iz + nu))
    return total


def dirichlet_gain(n, d, beta):
    """|sin(n pi d beta) / sin(pi d beta)|**2 with the removable singularity filled."""
    x = math.pi * d * beta
    if abs(math.sin(x)) < 1e-12:
        return float(n * n)
    return (math.sin(n * x) / math.sin(x)) ** 2


def conjugate_phases(q_y, q_z, d_y, d_z, beta_y, beta_z):
    return [
        -(2 * math.pi * d_y * beta_y * iy + 2 * math.pi * d_z * beta_z * iz)
        for iy in range(q_y)
        for iz in range(q_z)
    ]


def quadratic_form_gain(weights, a):
    """|a^T w|**2 written as the double sum over w_q conj(w_i) a_q conj(a_i)."""
    total = 0j
    for q in range(len(a)):
        for i in range(len(a)):
            total += weights[q] * np.conj(weights[i]) * a[q] * np.conj(a[i])
    return total


def brute_force_discrete(q_y, q_z, d_y, d_z, bits, points):
    """Gauge-fixed exhaustive max-min over a discrete alphabet, plain loops."""
    S = 2**bits
    best = -1.0
    best_levels = None
    Q = q_y * q_z
    for tail in itertools.product(range(S), repeat=Q - 1):
        levels = (0,) + tail
        phases = [2 * math.pi * lv / S for lv in levels]
        worst = min(abs(double_sum_response(q_y, q_z, d_y, d_z, phases, by, bz)) ** 2 for by, bz in points)
        if worst > best + 1e-12:
            best, best_levels = worst, levels
    return best, best_levels
