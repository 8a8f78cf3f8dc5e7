# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo kernels (primary backend).

Mirrors _bridge_py operation for operation: same keyed Philox streams, same
draw order, and the same floating-point evaluation order (the extension is
built with FP contraction disabled), so both backends produce bit-identical
results.  The per-path loops run without the GIL, which is what lets the
driver get real speedup from threads.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport exp, sqrt
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_standard_normal,
    random_standard_uniform,
)

from numpy.random import Philox

cnp.import_array()

backend_name = "cython"

ROLE_BRIDGE = 0
ROLE_HIT_NORMAL = 1
ROLE_HIT_UNIFORM = 2


cdef bitgen_t *_state(object bit_generator):
    return <bitgen_t *> PyCapsule_GetPointer(bit_generator.capsule, "BitGenerator")


cdef object _philox(unsigned long long seed, unsigned long long role,
                    unsigned long long path):
    key = np.empty(2, dtype=np.uint64)
    key[0] = seed
    key[1] = (role << 56) | path
    return Philox(key=key)


def bridge_trapezoid_sums(unsigned long long seed, double x, double total,
                           int n_steps, double[::1] coef, double[::1] out,
                           long long lo, long long hi):
    """sum_j coef[j] X_j over Bessel(3) bridge paths lo..hi-1."""
    cdef int n = n_steps
    cdef double du = total / n
    cdef double sq = sqrt(du)
    cdef double[:, ::1] w = np.empty((n, 3))
    cdef long long p
    cdef int j
    cdef double w1, w2, w3, wn1, wn2, wn3, fr, b1, b2, b3, xj, acc
    cdef bitgen_t *rng
    for p in range(lo, hi):
        bg = _philox(seed, ROLE_BRIDGE, <unsigned long long> p)
        rng = _state(bg)
        with nogil:
            w1 = 0.0
            w2 = 0.0
            w3 = 0.0
            for j in range(n):
                w1 = w1 + (random_standard_normal(rng) * sq)
                w2 = w2 + (random_standard_normal(rng) * sq)
                w3 = w3 + (random_standard_normal(rng) * sq)
                w[j, 0] = w1
                w[j, 1] = w2
                w[j, 2] = w3
            wn1 = w[n - 1, 0]
            wn2 = w[n - 1, 1]
            wn3 = w[n - 1, 2]
            acc = 0.0 + (coef[0] * x)
            for j in range(1, n):
                fr = (<double> j) / n
                b1 = (w[j - 1, 0] - fr * wn1) + (x * (1.0 - fr))
                b2 = w[j - 1, 1] - fr * wn2
                b3 = w[j - 1, 2] - fr * wn3
                xj = sqrt(((b1 * b1) + (b2 * b2)) + (b3 * b3))
                acc = acc + (coef[j] * xj)
            # terminal value is exactly 0, contributing coef[n] * 0.0
            acc = acc + (coef[n] * 0.0)
            out[p - lo] = acc


def first_passage_steps(unsigned long long seed, double level, int n_steps,
                        double dt, long long[::1] out, long long lo, long long hi):
    """First-passage step index (-1 for no hit) per path into out."""
    cdef double sq = sqrt(dt)
    cdef long long p
    cdef int j, hit
    cdef double pos, prev, u
    cdef bitgen_t *rng_n
    cdef bitgen_t *rng_u
    for p in range(lo, hi):
        bg_n = _philox(seed, ROLE_HIT_NORMAL, <unsigned long long> p)
        bg_u = _philox(seed, ROLE_HIT_UNIFORM, <unsigned long long> p)
        rng_n = _state(bg_n)
        rng_u = _state(bg_u)
        with nogil:
            pos = 0.0
            hit = -1
            for j in range(n_steps):
                prev = pos
                pos = pos + (random_standard_normal(rng_n) * sq)
                if pos >= level:
                    hit = j
                    break
                u = random_standard_uniform(rng_u)
                if u < exp(((-2.0 * (level - prev)) * (level - pos)) / dt):
                    hit = j
                    break
            out[p - lo] = hit
