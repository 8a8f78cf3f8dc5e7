"""Pure-numpy Monte Carlo kernels (fallback backend).

Per-path random streams are keyed Philox counters: path p, role r uses
key = [seed, (r << 56) | p].  Every path therefore owns independent streams
regardless of chunking, so results are bit-identical across thread counts and
across this backend and the compiled one.  Each kernel writes results into a
caller-indexed slice of a preallocated array; no reductions happen here.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Generator, Philox

ROLE_BRIDGE = 0
ROLE_HIT_NORMAL = 1
ROLE_HIT_UNIFORM = 2

backend_name = "python"


def path_generator(seed: int, role: int, path: int) -> Generator:
    key = np.array([seed, (role << 56) | path], dtype=np.uint64)
    return Generator(Philox(key=key))


def bridge_path(seed: int, path: int, x: float, total: float, n_steps: int):
    """One exact Bessel(3) bridge from x (at time 0) to 0 (at time total).

    The bridge is the norm of a 3-D Brownian bridge whose first component
    runs x -> 0 and the other two 0 -> 0.  Returns the (n_steps + 1)-point
    path on the uniform grid; endpoints are set exactly.
    """
    g = path_generator(seed, ROLE_BRIDGE, path)
    z = g.standard_normal((n_steps, 3))
    du = total / n_steps
    w = np.cumsum(z * np.sqrt(du), axis=0)
    fr = np.arange(1, n_steps + 1) / n_steps  # u_j / total
    b = w - fr[:, None] * w[-1]
    b[:, 0] += x * (1.0 - fr)
    vals = np.empty(n_steps + 1)
    vals[0] = x
    vals[1:] = np.sqrt(np.einsum("ij,ij->i", b, b))
    vals[-1] = 0.0
    return vals


def bridge_trapezoid_sums(seed: int, x: float, total: float, n_steps: int,
                          coef: np.ndarray, out: np.ndarray,
                          lo: int, hi: int) -> None:
    """sum_j coef[j] X_j per path into out[lo-lo : hi-lo].

    coef carries both the trapezoid weights and the potential samples, so the
    sum is the trapezoid approximation of int f''(u) X_u du.  The driver
    exponentiates; keeping exp out of the kernels lets both backends share
    one exp implementation and stay bit-identical.
    """
    for p in range(lo, hi):
        vals = bridge_path(seed, p, x, total, n_steps)
        # cumsum accumulates left to right, matching the compiled kernel's
        # scalar loop bit for bit (the extension disables FP contraction)
        out[p - lo] = np.cumsum(coef * vals)[-1]


def first_passage_steps(seed: int, level: float, n_steps: int, dt: float,
                        out: np.ndarray, lo: int, hi: int) -> None:
    """First-passage step index of level per path into out (-1 if no hit).

    Euler walk with the exact Brownian-bridge crossing probability
    exp(-2 (level - a)(level - b) / dt) applied between consecutive
    positions a, b below the level.  A crossing inside step j is binned at
    step j (time (j + 1) dt), like a direct hit.
    """
    sq = np.sqrt(dt)
    for p in range(lo, hi):
        gn = path_generator(seed, ROLE_HIT_NORMAL, p)
        pos = np.cumsum(gn.standard_normal(n_steps) * sq)
        above = np.nonzero(pos >= level)[0]
        jd = int(above[0]) if above.size else n_steps
        hit = jd if above.size else -1
        if jd > 0:
            gu = path_generator(seed, ROLE_HIT_UNIFORM, p)
            u = gu.random(jd)
            prev = np.empty(jd)
            prev[0] = 0.0
            prev[1:] = pos[: jd - 1]
            p_cross = np.exp(-2.0 * (level - prev) * (level - pos[:jd]) / dt)
            crossed = np.nonzero(u < p_cross)[0]
            if crossed.size:
                hit = int(crossed[0])
        out[p - lo] = hit
