"""Vector-field definitions, derivative exactness, and invariant-region checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from alleelab import model, sim
from alleelab.errors import DomainError
from alleelab.model import Params

from conftest import FIG2_KW, random_feasible_params


def test_params_feasibility():
    with pytest.raises(DomainError):
        Params(r=-1, s=1, k=1, q=1, a=1, n=1, m=1, b=1, c=0)
    with pytest.raises(DomainError):
        Params(r=1, s=1, k=1, q=1, a=1, n=1, m=1, b=1, c=-2.1)  # c <= -2 sqrt(a)
    p = Params(r=1, s=1, k=1, q=1, a=1, n=1, m=2, b=1, c=0)
    assert p.allee_strong() and not p.allee_weak()
    assert p.with_(m=0.5).allee_weak()


def test_rhs_requires_positive_x(fig2_params):
    with pytest.raises(DomainError):
        model.rhs((0.0, 1.0), fig2_params)
    with pytest.raises(DomainError):
        model.jacobian((-0.1, 1.0), fig2_params)


def test_rhs_at_carrying_capacity(fig2_params):
    # logistic term vanishes at x = k, leaving only Allee mortality
    p = fig2_params
    f = model.rhs((p.k, 0.0), p)
    assert f[0] == pytest.approx(-p.m * p.k / (p.k + p.b), rel=1e-14)
    assert f[1] == 0.0


def test_rhs_boundary_equilibrium_at_k_minus_b():
    # with m = b r (and below the fold threshold) x = k - b is a rest point
    p = Params(r=0.7, s=0.2, k=3.0, q=0.4, a=1.5, n=2.0, m=0.7 * 0.8, b=0.8, c=0.1)
    assert p.m < p.r * (p.b + p.k) ** 2 / (4 * p.k)
    f = model.rhs((p.k - p.b, 0.0), p)
    assert abs(f[0]) < 1e-14 * p.r * p.k


def test_rhs_fig2_point_frozen_value(fig2_params):
    # frozen from a direct high-precision substitution (mpmath, 50 digits)
    f = model.rhs((1.0, 1.0), fig2_params)
    assert f[0] == pytest.approx(0.21807058536533938, rel=1e-13)
    assert f[1] == pytest.approx(0.09336777251184834, rel=1e-13)


def test_rescaled_equals_scaled_raw(fig2_params):
    p = fig2_params
    x, y = 1.0, 1.0
    factor = p.k * p.n * x * (x + p.b) * (x * x + p.c * x + p.a)
    raw = model.rhs((x, y), p)
    resc = model.rhs_rescaled((x, y), p)
    assert np.allclose(resc, factor * raw, rtol=1e-12)


def test_rescaled_origin_and_axis(fig2_params):
    assert np.all(model.rhs_rescaled((0.0, 0.0), fig2_params) == 0.0)
    for x in (0.0, 0.3, 2.0, 9.0):
        assert model.rhs_rescaled((x, 0.0), fig2_params)[1] == 0.0


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_scalar_equivalence_property(seed):
    rng = np.random.default_rng(seed)
    p = random_feasible_params(rng)
    x = rng.uniform(1e-3, 2.0) * p.k
    y = rng.uniform(0.0, 2.0) * p.n * p.k
    factor = model.scale_factor((x, y), p)
    raw = model.rhs((x, y), p)
    resc = model.rhs_rescaled((x, y), p)
    scale = np.abs(factor * raw) + np.abs(resc) + 1e-300
    assert np.all(np.abs(resc - factor * raw) / scale <= 1e-12)


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_axis_invariance_property(seed):
    rng = np.random.default_rng(seed)
    p = random_feasible_params(rng)
    x = rng.uniform(1e-3, 2.0) * p.k
    assert model.rhs((x, 0.0), p)[1] == 0.0
    assert model.rhs_rescaled((x, 0.0), p)[1] == 0.0


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_prey_decreases_beyond_carrying_capacity(seed):
    rng = np.random.default_rng(seed)
    p = random_feasible_params(rng)
    x = p.k * rng.uniform(1.0 + 1e-9, 3.0)
    y = rng.uniform(0.0, 2.0) * p.n * p.k
    assert model.rhs((x, y), p)[0] < 0.0


def test_jacobian_structure_at_positive_equilibrium(fig2_params):
    p = fig2_params
    x = 0.379974852  # near the coexistence state at b = 0.5
    J = model.jacobian((x, p.n * x), p)
    assert J[1, 0] == pytest.approx(p.n * p.s, rel=1e-12)
    assert J[1, 1] == pytest.approx(-p.s, rel=1e-12)


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_jacobian_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    p = random_feasible_params(rng)
    x = rng.uniform(0.05, 1.5) * p.k
    y = rng.uniform(0.05, 1.5) * p.n * p.k
    J = model.jacobian((x, y), p)
    Jfd = np.empty((2, 2))
    for j, (dx, dy) in enumerate(((1.0, 0.0), (0.0, 1.0))):
        h = 1e-6 * (1.0 + abs(x if j == 0 else y))
        fp = model.rhs((x + h * dx, y + h * dy), p)
        fm = model.rhs((x - h * dx, y - h * dy), p)
        Jfd[:, j] = (fp - fm) / (2 * h)
    assert np.abs(J - Jfd).max() <= 1e-6 * (1.0 + np.abs(J).max())


def test_param_derivatives_match_finite_differences(fig2_params):
    p = fig2_params
    x, y = 0.9, 2.5
    for name in model.PARAM_NAMES:
        h = 1e-6 * (1.0 + abs(p.get(name)))
        pp, pm = p.with_(**{name: p.get(name) + h}), p.with_(**{name: p.get(name) - h})
        for deriv, rhs_of in ((model.rhs_param_deriv, model.rhs_vec),
                              (model.rhs_rescaled_param_deriv, model.rhs_rescaled_vec)):
            d = np.array(deriv(x, y, p, name))
            fd = (np.array(rhs_of(x, y, pp)) - np.array(rhs_of(x, y, pm))) / (2 * h)
            assert np.abs(d - fd).max() <= 1e-5 * (1.0 + np.abs(d).max()), name


def test_derivatives_k_order_validation(fig2_params):
    with pytest.raises(DomainError):
        model.derivatives_k((1.0, 1.0), fig2_params, 4)


def test_second_form_matches_finite_differences(fig2_params):
    p = fig2_params
    x, y = 0.7, 1.8
    B = model.derivatives_k((x, y), p, 2)
    h = 1e-5
    d2xx = (model.rhs((x + h, y), p) - 2 * model.rhs((x, y), p) + model.rhs((x - h, y), p)) / h**2
    assert np.abs(B[:, 0, 0] - d2xx).max() <= 1e-5 * (1.0 + np.abs(d2xx).max())


def test_third_form_symmetry_and_y_derivative(fig2_params):
    p = fig2_params
    x, y = 0.7, 1.8
    C = model.derivatives_k((x, y), p, 3)
    for perm in ((0, 2, 1, 3), (0, 3, 2, 1), (0, 1, 3, 2)):
        assert np.abs(C - np.transpose(C, perm)).max() == 0.0
    # CAS-checked third derivatives of the predator equation (quadratic in y):
    # d3/dy3 = 0, d3/dx dy2 = 2s/(n x^2), d3/dx2 dy = -4sy/(n x^3), d3/dx3 = 6sy^2/(n x^4)
    assert C[1, 1, 1, 1] == 0.0
    assert C[1, 0, 1, 1] == pytest.approx(2 * p.s / (p.n * x**2), rel=1e-12)
    assert C[1, 0, 0, 1] == pytest.approx(-4 * p.s * y / (p.n * x**3), rel=1e-12)
    assert C[1, 0, 0, 0] == pytest.approx(6 * p.s * y**2 / (p.n * x**4), rel=1e-12)


def test_trapping_region_smoke():
    # Light version of the invariant-region property (full sweep in acceptance):
    # trajectories started inside the trapping box stay there.
    rng = np.random.default_rng(5)
    for _ in range(5):
        p = random_feasible_params(rng)
        horizon = 1e3 / min(p.r, p.s)
        margin = 1e-6 * p.k
        for _ in range(3):
            x0 = rng.uniform(0.05, 1.0) * p.k
            y0 = rng.uniform(0.0, 1.0) * p.n * p.k
            orb = sim.orbit(p, (x0, y0), (0.0, horizon), rtol=1e-8)
            assert orb.x.max() <= p.k + margin
            assert orb.y.max() <= p.n * p.k + margin
            assert orb.x.min() > 0.0 or orb.terminated_at_floor
