"""Closed-form fields: heat solutions omega, the adjoint solution Phi, the
Schrodinger-family solution u1, and the level-hitting density h.

Convention note: the diffusion coefficient is 1/2 in every operator here
(backward, adjoint, heat); 1/2 is the convention consistent with standard
Brownian motion and the hitting density h, and we adopt it uniformly.  The
heat solutions omega feeding Phi and u1 must solve the forward equation
omega_tau = omega_zz/2 (the Gaussian kernel does; the exponential member
needs +mu^2 tau/2 in its exponent -- see ExponentialOmega for the sign
discussion).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import PolyBoundary
from .errors import (
    HorizonViolation,
    NegativeLevel,
    NonpositiveTau,
    NonpositiveTime,
)

_SQRT_2PI = math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# heat solutions omega(tau, z), each satisfying omega_tau = omega_zz / 2
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentialOmega:
    """omega(tau, z) = exp(+mu^2 tau / 2 + sign * mu * z); valid for any tau.

    Sign note: the source material displays exp{-lambda^2 t/2 +/- lambda x},
    but that function solves omega_t + omega_xx/2 = 0, not the heat equation
    its own surrounding display demands, and the composed Phi and u1 then
    fail their residual checks at every lambda != 0.  The +1/2 sign is forced
    by omega_tau = omega_zz/2; the residual harness arbitrates (it restores
    order-2 convergence for the whole family).
    """

    mu: float = 0.0
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")

    def value(self, tau, z):
        return np.exp(0.5 * self.mu**2 * tau + self.sign * self.mu * np.asarray(z, float))

    def dz(self, tau, z):
        return self.sign * self.mu * self.value(tau, z)

    requires_positive_tau = False


def _gauss_kernel(tau, z):
    return np.exp(-np.square(z) / (2.0 * tau)) / np.sqrt(2.0 * np.pi * tau)


@dataclass(frozen=True)
class GaussOmega:
    """Heat kernel centered at y: omega(tau, z) = phi_tau(z - y), tau > 0."""

    y: float = 0.0

    def _check(self, tau):
        if np.any(np.asarray(tau) <= 0.0):
            raise NonpositiveTau(f"Gauss omega needs tau > 0, got {tau}")

    def value(self, tau, z):
        self._check(tau)
        return _gauss_kernel(tau, np.asarray(z, float) - self.y)

    def dz(self, tau, z):
        self._check(tau)
        zz = np.asarray(z, float) - self.y
        return -zz / tau * _gauss_kernel(tau, zz)

    requires_positive_tau = True


@dataclass(frozen=True)
class ImagesOmega:
    """Mirrored Gaussian pair phi_tau(z - y) - phi_tau(z + y), scaled by 1/(2y).

    The antisymmetric combination vanishes at z = 0 for all tau, which is the
    structural reason to reach for images when a solution must die on the
    boundary.  Its y -> 0 limit is -phi_tau'(z) = h(tau, z).
    """

    y: float

    def __post_init__(self):
        if self.y <= 0.0:
            raise ValueError("ImagesOmega needs a mirror offset y > 0")

    def _check(self, tau):
        if np.any(np.asarray(tau) <= 0.0):
            raise NonpositiveTau(f"Images omega needs tau > 0, got {tau}")

    def value(self, tau, z):
        self._check(tau)
        z = np.asarray(z, float)
        return (_gauss_kernel(tau, z - self.y) - _gauss_kernel(tau, z + self.y)) / (2 * self.y)

    def dz(self, tau, z):
        self._check(tau)
        z = np.asarray(z, float)
        left = -(z - self.y) / tau * _gauss_kernel(tau, z - self.y)
        right = -(z + self.y) / tau * _gauss_kernel(tau, z + self.y)
        return (left - right) / (2 * self.y)

    requires_positive_tau = True


OmegaKind = ExponentialOmega | GaussOmega | ImagesOmega


def omega_eval(kind: OmegaKind, tau, x):
    """omega(tau, x) for the given kind."""
    return kind.value(tau, x)


# ---------------------------------------------------------------------------
# Phi: solution of the adjoint equation -Phi_t + Phi_xx/2 - x f'' Phi = 0
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhiParams:
    """Parameters selecting one member of the adjoint-solution family.

    Phi(t,x) = exp(I2(t)/2 - x f'(t)) * omega(t, x - I1(t)) with
    omega = ExponentialOmega(lam, sign_x).  log Phi is affine in x, which is
    what makes the transformed potential collapse back to x f''(t).

    sign_int records the sign of the integral term in the literal one-line
    exponent form; the composition above forces sign_int = -sign_x (and a
    factor lam the literal display drops).  See phi_eval_literal.
    """

    f: PolyBoundary
    lam: float = 0.0
    sign_x: int = 1
    sign_int: int = -1

    def __post_init__(self):
        if self.sign_x not in (-1, 1) or self.sign_int not in (-1, 1):
            raise ValueError("signs must be +1 or -1")

    def _omega(self):
        return ExponentialOmega(self.lam, self.sign_x)

    def value(self, t, x):
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        pref = np.exp(0.5 * self.f.i2(t) - x * self.f.df(t))
        return pref * self._omega().value(t, x - self.f.i1(t))

    def dx(self, t, x):
        # d/dx log Phi = -f'(t) + sign_x * lam  (affine exponent)
        return self.value(t, x) * (-self.f.df(np.asarray(t, float)) + self.sign_x * self.lam)

    def dx_log(self, t, x):
        return -self.f.df(np.asarray(t, float)) + self.sign_x * self.lam + 0.0 * np.asarray(x, float)


def phi_eval(p: PhiParams, t, x):
    """Phi(t,x); strictly positive everywhere."""
    return p.value(t, x)


def phi_eval_literal(f: PolyBoundary, lam: float, e_x: int, e_int: int, t, x):
    """One-line exponent reading of Phi with the ambiguous signs explicit:

        exp( I2(t)/2 - x*(f'(t) + e_x*lam) + lam^2 t/2 + e_int*lam*I1(t) )

    Relative to the source display this restores a dropped factor lam on the
    integral term and flips the lam^2 t/2 sign (see ExponentialOmega).  Only
    (e_x, e_int) = (-s, -s) reproduces phi_eval with sign_x = s; the
    mixed-sign readings fail the adjoint residual check (build-time test).
    """
    t = np.asarray(t, float)
    x = np.asarray(x, float)
    expo = (
        0.5 * f.i2(t)
        - x * (f.df(t) + e_x * lam)
        + 0.5 * lam**2 * t
        + e_int * lam * f.i1(t)
    )
    return np.exp(expo)


# ---------------------------------------------------------------------------
# u1: solution of the backward equation u_t + u_xx/2 - x f'' u = 0
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class U1Params:
    """u1(t,x) = exp((I2(s)-I2(t))/2 + x f'(t)) * omega(s-t, x + I1(s) - I1(t))."""

    f: PolyBoundary
    s: float
    omega: OmegaKind

    def __post_init__(self):
        if not self.s > 0.0:
            raise ValueError("horizon s must be positive")

    def _check_horizon(self, t):
        if self.omega.requires_positive_tau and np.any(np.asarray(t) >= self.s):
            raise HorizonViolation(f"u1 with a kernel omega needs t < s = {self.s}")

    def _pieces(self, t, x):
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        pref = np.exp(0.5 * (self.f.i2(self.s) - self.f.i2(t)) + x * self.f.df(t))
        tau = self.s - t
        z = x + self.f.i1(self.s) - self.f.i1(t)
        return t, x, pref, tau, z

    def value(self, t, x):
        self._check_horizon(t)
        t, x, pref, tau, z = self._pieces(t, x)
        return pref * self.omega.value(tau, z)

    def dx(self, t, x):
        self._check_horizon(t)
        t, x, pref, tau, z = self._pieces(t, x)
        return pref * (self.f.df(t) * self.omega.value(tau, z) + self.omega.dz(tau, z))


def u1_eval(p: U1Params, t, x):
    """u1(t,x); raises HorizonViolation for t >= s with a kernel omega."""
    return p.value(t, x)


# ---------------------------------------------------------------------------
# hitting density of level x for standard Brownian motion
# ---------------------------------------------------------------------------


def hitting_density(t, x):
    """h(t,x) = x / sqrt(2 pi t^3) * exp(-x^2 / (2t)), a density in t."""
    t = np.asarray(t, float)
    x = np.asarray(x, float)
    if np.any(t <= 0.0):
        raise NonpositiveTime(f"hitting density needs t > 0, got {t}")
    if np.any(x < 0.0):
        raise NegativeLevel(f"hitting density needs level x >= 0, got {x}")
    out = x / np.sqrt(2.0 * np.pi * t**3) * np.exp(-np.square(x) / (2.0 * t))
    return out if out.shape else float(out)


def hitting_density_dx(t, x):
    """d/dx h(t,x) = (2 pi t^3)^(-1/2) exp(-x^2/2t) (1 - x^2/t)."""
    t = np.asarray(t, float)
    x = np.asarray(x, float)
    return np.exp(-np.square(x) / (2.0 * t)) / np.sqrt(2.0 * np.pi * t**3) * (1.0 - np.square(x) / t)


def hitting_density_dxx(t, x):
    """Second x-derivative of h."""
    t = np.asarray(t, float)
    x = np.asarray(x, float)
    g = np.exp(-np.square(x) / (2.0 * t)) / np.sqrt(2.0 * np.pi * t**3)
    return g * (x / t) * (np.square(x) / t - 3.0)
