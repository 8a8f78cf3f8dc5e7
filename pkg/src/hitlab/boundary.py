"""Polynomial boundary/potential generator f with exact calculus.

f enters every formula through f, f', f'' and the running integrals
I1(t) = int_0^t f'(u) du and I2(t) = int_0^t (f'(u))^2 du.  Restricting f to
polynomials makes all five quantities exact closed-form polynomials, so no
quadrature error enters at the innermost layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as P


@dataclass(frozen=True)
class PolyBoundary:
    """f(t) = sum_i coeffs[i] * t**i."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs):
        coeffs = tuple(float(c) for c in coeffs)
        if not coeffs:
            raise ValueError("PolyBoundary needs at least one coefficient")
        if not all(np.isfinite(coeffs)):
            raise ValueError("PolyBoundary coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    @cached_property
    def _d1(self):
        return P.polyder(self.coeffs) if len(self.coeffs) > 1 else np.zeros(1)

    @cached_property
    def _d2(self):
        return P.polyder(self.coeffs, 2) if len(self.coeffs) > 2 else np.zeros(1)

    @cached_property
    def _i1(self):
        # antiderivative of f' with zero constant, so I1(0) = 0
        return P.polyint(self._d1)

    @cached_property
    def _i2(self):
        return P.polyint(P.polymul(self._d1, self._d1))

    def f(self, t):
        return P.polyval(t, self.coeffs)

    def df(self, t):
        return P.polyval(t, self._d1)

    def d2f(self, t):
        return P.polyval(t, self._d2)

    def i1(self, t):
        return P.polyval(t, self._i1)

    def i2(self, t):
        return P.polyval(t, self._i2)

    @property
    def degree(self) -> int:
        d = len(self.coeffs) - 1
        while d > 0 and self.coeffs[d] == 0.0:
            d -= 1
        return d

    def curvature_is_constant(self) -> bool:
        """True when f'' does not depend on t (degree <= 2)."""
        return self.degree <= 2


def boundary_eval(f: PolyBoundary, t):
    """Evaluate (f, f', f'', I1, I2) at t, all exact to machine rounding."""
    return f.f(t), f.df(t), f.d2f(t), f.i1(t), f.i2(t)
