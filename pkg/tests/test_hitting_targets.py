"""Exact hitting-density targets: the images member and the Airy series.

The Airy eigenexpansion is cross-checked against an independent
Crank-Nicolson evolution of w_tau = w_xx / 2 - c x w on the half-line:
starting from the series at a small tau and marching to tau = 1 must
reproduce the series there, which independently validates the eigenvalues
(zeros of Ai) and the expansion weights (1 / Ai'(a_k)).
"""

import numpy as np
import pytest
from scipy.linalg import solve_banded

from hitlab import (
    AiryHittingU1,
    HorizonViolation,
    ImagesHittingU1,
    PolyBoundary,
    UnsupportedBoundary,
    hitting_density,
    hitting_density_dx,
    hitting_target_phi,
    hitting_target_u1,
)

F_QUAD = PolyBoundary([0.0, 0.0, 0.5])
F_LIN = PolyBoundary([0.0, 0.3])


# ---------------------------------------------------------------------------
# images member (f'' == 0)
# ---------------------------------------------------------------------------


def test_images_w_is_the_hitting_density():
    u = ImagesHittingU1(F_LIN, s=1.0)
    ts = np.array([0.0, 0.4, 0.85])
    xs = np.linspace(0.1, 3.0, 7)
    for t in ts:
        np.testing.assert_allclose(u.w(t, xs), hitting_density(1.0 - t, xs),
                                   rtol=1e-15)


def test_images_u1_is_hx_minus_slope_h():
    u = ImagesHittingU1(F_LIN, s=1.0)
    t, xs = 0.3, np.linspace(0.2, 2.5, 6)
    expect = hitting_density_dx(0.7, xs) - 0.3 * hitting_density(0.7, xs)
    np.testing.assert_allclose(u.value(t, xs), expect, rtol=1e-14)
    # dx consistent with finite differences of value
    h = 1e-6
    fd = (u.value(t, xs + h) - u.value(t, xs - h)) / (2 * h)
    np.testing.assert_allclose(u.dx(t, xs), fd, rtol=1e-7)


def test_images_rejects_curved_boundaries_and_horizon():
    with pytest.raises(UnsupportedBoundary):
        ImagesHittingU1(F_QUAD, s=1.0)
    u = ImagesHittingU1(F_LIN, s=1.0)
    with pytest.raises(HorizonViolation):
        u.value(1.0, 0.5)


# ---------------------------------------------------------------------------
# Airy member (constant f'' > 0)
# ---------------------------------------------------------------------------


def test_airy_rejects_wrong_curvature():
    with pytest.raises(UnsupportedBoundary):
        AiryHittingU1(F_LIN, s=1.0)
    with pytest.raises(UnsupportedBoundary):
        AiryHittingU1(PolyBoundary([0.0, 0.0, -0.5]), s=1.0)
    with pytest.raises(UnsupportedBoundary):
        AiryHittingU1(PolyBoundary([0.0, 0.0, 0.0, 1.0]), s=1.0)
    with pytest.raises(ValueError):
        AiryHittingU1(F_QUAD, s=1.0, tau_floor=2.0)


def test_airy_tau_floor_guard():
    u = AiryHittingU1(F_QUAD, s=1.0, tau_floor=0.05)
    with pytest.raises(HorizonViolation):
        u.w(0.96, 1.0)
    assert np.isfinite(u.w(0.9, 1.0))


def test_airy_dirichlet_and_envelope():
    u = AiryHittingU1(F_QUAD, s=1.0)
    for t in (0.0, 0.5, 0.9):
        # the series hits zero at x = 0 by cancellation; the residue grows
        # with the term count, i.e. as tau shrinks
        assert abs(u.w(t, 0.0)) < 1e-11
        xs = np.linspace(0.05, 4.0, 40)
        w = np.asarray(u.w(t, xs))
        # deep in the tail the series cancels O(0.1) terms down to ~1e-15
        # absolute rounding noise, so the envelope holds up to that floor
        assert np.all(w > -1e-11)
        assert np.all(w <= hitting_density(1.0 - t, xs) + 1e-11)
        bulk = w[xs <= 2.5]
        assert np.all(bulk > 0.0)


def test_airy_spatial_derivatives_are_consistent():
    u = AiryHittingU1(F_QUAD, s=1.0)
    t, xs = 0.3, np.linspace(0.2, 3.0, 8)
    h = 1e-5
    fd1 = (u.w(t, xs + h) - u.w(t, xs - h)) / (2 * h)
    fd2 = (u.w(t, xs + h) - 2 * u.w(t, xs) + u.w(t, xs - h)) / h**2
    np.testing.assert_allclose(u.w_dx(t, xs), fd1, rtol=1e-8)
    np.testing.assert_allclose(u.w_dxx(t, xs), fd2, rtol=1e-4)
    # u1 = w_x - f'(t) w and its derivative
    np.testing.assert_allclose(
        u.value(t, xs), u.w_dx(t, xs) - F_QUAD.df(t) * u.w(t, xs), rtol=1e-14)
    np.testing.assert_allclose(
        u.dx(t, xs), u.w_dxx(t, xs) - F_QUAD.df(t) * u.w_dx(t, xs), rtol=1e-14)


def test_airy_w_satisfies_its_pde_pointwise():
    # time derivative by central differences, space derivatives exact:
    # w_t + w_xx/2 - c x w = 0 (backward form in t)
    c = 1.0
    u = AiryHittingU1(F_QUAD, s=1.0)
    dt = 1e-5
    for t, x in [(0.2, 0.6), (0.6, 1.4), (0.85, 2.2)]:
        w_t = (u.w(t + dt, x) - u.w(t - dt, x)) / (2 * dt)
        res = w_t + 0.5 * u.w_dxx(t, x) - c * x * u.w(t, x)
        assert abs(res) < 1e-7 * max(1.0, abs(u.w_dxx(t, x)))


def crank_nicolson_halfline(w0, xs, c, tau0, tau1, n_steps):
    """March w_tau = w_xx/2 - c x w with Dirichlet ends on xs."""
    dx = xs[1] - xs[0]
    dtau = (tau1 - tau0) / n_steps
    n = xs.size
    lap = np.zeros((3, n))
    lap[0, 1:] = 1.0 / dx**2
    lap[1, :] = -2.0 / dx**2
    lap[2, :-1] = 1.0 / dx**2
    rhs_op = lap * (0.25 * dtau)
    rhs_op[1, :] += 1.0 - 0.5 * dtau * c * xs
    lhs = -lap * (0.25 * dtau)
    lhs[1, :] += 1.0 + 0.5 * dtau * c * xs
    # Dirichlet rows must be identity rows of the implicit matrix, or the
    # solve and the boundary condition fight each other
    lhs[1, 0] = lhs[1, -1] = 1.0
    lhs[0, 1] = lhs[2, -2] = 0.0
    w = w0.copy()
    w[0] = w[-1] = 0.0
    for _ in range(n_steps):
        rhs = (rhs_op[1] * w)
        rhs[1:] += rhs_op[0, 1:] * w[:-1]
        rhs[:-1] += rhs_op[2, :-1] * w[1:]
        rhs[0] = rhs[-1] = 0.0
        w = solve_banded((1, 1), lhs, rhs)
    return w


def test_airy_series_matches_crank_nicolson_evolution():
    c = 1.0
    u = AiryHittingU1(F_QUAD, s=1.0)
    xs = np.linspace(0.0, 12.0, 2401)
    tau0, tau1 = 0.3, 1.0
    # series gives w as a function of tau = s - t
    w_start = np.asarray(u.w(1.0 - tau0, xs))
    w_end = crank_nicolson_halfline(w_start, xs, c, tau0, tau1, n_steps=1400)
    ref = np.asarray(u.w(0.0, xs))
    sel = (xs >= 0.3) & (xs <= 3.5)
    np.testing.assert_allclose(w_end[sel], ref[sel], rtol=2e-4)


def test_airy_truncation_adapts_with_tau():
    u = AiryHittingU1(F_QUAD, s=1.0)
    _, k_far = u._weights(0.0)    # tau = 1: few terms survive
    _, k_near = u._weights(0.9)   # tau = 0.1: many more needed
    assert k_near > 3 * k_far


# ---------------------------------------------------------------------------
# factory
# ---------------------------------------------------------------------------


def test_factory_dispatch():
    assert isinstance(hitting_target_u1(F_LIN, 1.0), ImagesHittingU1)
    assert isinstance(hitting_target_u1(PolyBoundary([2.0]), 1.0), ImagesHittingU1)
    assert isinstance(hitting_target_u1(F_QUAD, 1.0), AiryHittingU1)
    with pytest.raises(UnsupportedBoundary):
        hitting_target_u1(PolyBoundary([0.0, 0.0, 0.0, 0.2]), 1.0)
    phi = hitting_target_phi(F_QUAD)
    assert phi.lam == 0.0 and phi.sign_x == 1
