"""u1 evaluators whose transformed field is exactly w = v * h(s-t, x).

The transformation machinery produces one solution w of the boundary-value
problem per choice of the heat solution omega inside u1.  The member matching
the hitting-density target (w/h = the Feynman-Kac bridge expectation, so
0 <= w <= h and w(t,0) = 0 for all t) is pinned down by its terminal dipole
and the Dirichlet condition at x = 0:

* f'' == 0 (f linear): the images/dipole limit.  u1 = h_x - f' h in closed
  form, obtained as the y -> 0 limit of mirrored-pair differences; w comes out
  as exactly h(s-t, x).
* f'' == c > 0 (constant): the backward operator is autonomous with linear
  potential c*x, so the target is the classical Dirichlet eigenexpansion in
  Airy functions on the half-line,

      w(t,x) = (kappa^2/2) * sum_k exp(kappa^2 a_k (s-t) / 2)
                              * Ai(kappa x + a_k) / Ai'(a_k),

  kappa = (2c)^(1/3), a_k the (negative) zeros of Ai.  u1 = w_x - f'(t) w.

No elementary omega (Gaussian, exponential, or any boosted images pair) can
reproduce the target for f'' > 0: the shifted-frame boundary is a parabola,
and single-image constructions are exact only for straight lines.  For
nonconstant f'' there is no exactly solvable target at all; such boundaries
are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import ai_zeros, airy

from .boundary import PolyBoundary
from .closed_forms import (
    PhiParams,
    hitting_density,
    hitting_density_dx,
    hitting_density_dxx,
)
from .errors import HorizonViolation, UnsupportedBoundary


@dataclass(frozen=True)
class ImagesHittingU1:
    """Closed-form target u1 for f'' == 0: u1 = h_x(s-t, x) - f' h(s-t, x)."""

    f: PolyBoundary
    s: float

    def __post_init__(self):
        if self.f.degree > 1:
            raise UnsupportedBoundary("ImagesHittingU1 needs a linear f (f'' == 0)")

    @property
    def _slope(self) -> float:
        return float(self.f.df(0.0))

    def _tau(self, t):
        tau = self.s - np.asarray(t, float)
        if np.any(tau <= 0.0):
            raise HorizonViolation(f"hitting target needs t < s = {self.s}")
        return tau

    def value(self, t, x):
        tau = self._tau(t)
        x = np.asarray(x, float)
        return hitting_density_dx(tau, x) - self._slope * hitting_density(tau, np.abs(x))

    def dx(self, t, x):
        tau = self._tau(t)
        x = np.asarray(x, float)
        return hitting_density_dxx(tau, x) - self._slope * hitting_density_dx(tau, x)

    def w(self, t, x):
        """The transformed field in closed form: exactly h(s-t, x)."""
        return hitting_density(self._tau(t), np.asarray(x, float))

    requires_positive_tau = True


class AiryHittingU1:
    """Airy-eigenexpansion target u1 for constant curvature f'' == c > 0.

    tau_floor bounds how close to the horizon the truncated series is trusted;
    the number of retained zeros is sized so the smallest admitted s - t still
    resolves the terminal dipole to ~1e-18 relative truncation.
    """

    def __init__(self, f: PolyBoundary, s: float, tau_floor: float = 0.02, max_terms: int = 200_000):
        c = float(f.d2f(0.0))
        if not f.curvature_is_constant() or c <= 0.0:
            raise UnsupportedBoundary("AiryHittingU1 needs constant f'' > 0")
        if not 0.0 < tau_floor < s:
            raise ValueError("tau_floor must lie in (0, s)")
        self.f = f
        self.s = float(s)
        self.tau_floor = float(tau_floor)
        self.curvature = c
        self.kappa = (2.0 * c) ** (1.0 / 3.0)
        # weights exp(kappa^2 a_k tau / 2); keep zeros until the tail at
        # tau_floor is below 1e-18 relative to the leading term
        abs_a_max = 2.1 + 84.0 / (self.kappa**2 * self.tau_floor)
        n_terms = int(((abs_a_max**1.5) * 8.0 / (3.0 * math.pi) + 1.0) / 4.0) + 8
        self.n_terms = min(max(n_terms, 64), max_terms)
        zeros, _, _, deriv = ai_zeros(self.n_terms)
        self._a = zeros  # negative, decreasing
        self._inv_aip = 1.0 / deriv

    requires_positive_tau = True

    @cached_property
    def _abs_a(self):
        return -self._a

    def _weights(self, t: float):
        tau = self.s - float(t)
        if tau < self.tau_floor:
            raise HorizonViolation(
                f"Airy target resolves t < s - tau_floor = {self.s - self.tau_floor}, got t = {t}"
            )
        # truncate where relative weight drops below 1e-18
        cutoff = self._abs_a[0] + 84.0 / (self.kappa**2 * tau)
        kmax = int(np.searchsorted(self._abs_a, cutoff)) + 1
        kmax = min(kmax, self.n_terms)
        w = np.exp(0.5 * self.kappa**2 * self._a[:kmax] * tau) * self._inv_aip[:kmax]
        return w, kmax

    def _ai_parts(self, x, kmax):
        x = np.atleast_1d(np.asarray(x, float))
        arg = self.kappa * x[:, None] + self._a[None, :kmax]
        with np.errstate(over="ignore"):  # Bi overflows harmlessly for large args
            ai, aip, _, _ = airy(arg)
        return x, arg, ai, aip

    def _series(self, t, x, order: int):
        w, kmax = self._weights(t)
        xv, arg, ai, aip = self._ai_parts(x, kmax)
        if order == 0:
            out = 0.5 * self.kappa**2 * (ai @ w)
        elif order == 1:
            out = 0.5 * self.kappa**3 * (aip @ w)
        else:  # Ai'' = z Ai
            out = 0.5 * self.kappa**4 * ((arg * ai) @ w)
        return out if np.ndim(x) else float(out[0])

    def w(self, t, x):
        """Exact transformed field w(t, x) = v(t,x) h(s-t,x)."""
        return self._series(t, x, 0)

    def w_dx(self, t, x):
        return self._series(t, x, 1)

    def w_dxx(self, t, x):
        return self._series(t, x, 2)

    def value(self, t, x):
        """u1 = w_x - f'(t) w (the member paired with Phi at lambda = 0)."""
        fp = float(self.f.df(t))
        return self._series(t, x, 1) - fp * self._series(t, x, 0)

    def dx(self, t, x):
        fp = float(self.f.df(t))
        return self._series(t, x, 2) - fp * self._series(t, x, 1)


def hitting_target_u1(f: PolyBoundary, s: float, tau_floor: float = 0.02):
    """Pick the exact hitting-density target for the given boundary."""
    if f.degree <= 1:
        return ImagesHittingU1(f, s)
    if f.curvature_is_constant() and f.d2f(0.0) > 0.0:
        return AiryHittingU1(f, s, tau_floor=tau_floor)
    raise UnsupportedBoundary(
        "exact hitting target exists only for f'' == 0 or constant f'' > 0 "
        f"(got degree {f.degree})"
    )


def hitting_target_phi(f: PolyBoundary) -> PhiParams:
    """The adjoint-family member paired with the hitting targets (lambda = 0)."""
    return PhiParams(f, lam=0.0, sign_x=1, sign_int=-1)
