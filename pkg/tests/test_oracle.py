"""Self-tests of the focal-value oracle on canonical normal forms."""

import math

import numpy as np
import pytest

from alleelab import equilibria as eq, normal_forms as nf, oracle
from alleelab.model import Params

from conftest import random_feasible_params


def _cubic_oscillator(sigma):
    # zdot = i z + sigma z|z|^2 in real coordinates
    P = {(3, 0): sigma, (1, 2): sigma}
    Q = {(2, 1): sigma, (0, 3): sigma}
    return P, Q


@pytest.mark.parametrize("sigma", [0.7, -1.3, 1e-4])
def test_first_coefficient_on_cubic_oscillator(sigma):
    P, Q = _cubic_oscillator(sigma)
    eta4, eta6 = oracle.focal_values_of_system(P, Q, 1.0)
    assert eta4 == pytest.approx(sigma, rel=1e-6)
    assert abs(eta6) <= 1e-12 * abs(sigma)


def test_second_coefficient_on_bautin_form():
    # zdot = i z + i b2 z^2 zbar + c2 z^3 zbar^2: l1 = 0, l2 = Re(c2)
    b2, c2 = 0.9, -0.45
    P = {(2, 1): -b2, (0, 3): -b2, (5, 0): c2, (3, 2): 2 * c2, (1, 4): c2}
    Q = {(3, 0): b2, (1, 2): b2, (4, 1): c2, (2, 3): 2 * c2, (0, 5): c2}
    eta4, eta6 = oracle.focal_values_of_system(P, Q, 1.0)
    assert abs(eta4) <= 1e-14
    assert eta6 == pytest.approx(c2, rel=1e-10)


def test_omega_scaling():
    sigma, w = 0.85, 0.37
    P, Q = _cubic_oscillator(sigma)
    eta4, _ = oracle.focal_values_of_system(P, Q, w)
    assert eta4 == pytest.approx(sigma, rel=1e-10)


def test_rotation_frame_conjugates_jacobian():
    J = np.array([[0.3, -1.1], [0.7, -0.3]])
    omega, T = oracle.rotation_frame(J)
    A = np.linalg.inv(T) @ J @ T
    assert omega == pytest.approx(math.sqrt(np.linalg.det(J)), rel=1e-12)
    assert A[0, 1] == pytest.approx(-omega, rel=1e-10)
    assert A[1, 0] == pytest.approx(omega, rel=1e-10)


def test_oracle_matches_guckenheimer_holmes_formula():
    # independent closed-form first coefficient on the real model
    rng = np.random.default_rng(4)
    checked = 0
    while checked < 10:
        p = random_feasible_params(rng)
        xs = rng.uniform(0.05, 0.9) * p.k
        try:
            ph = nf.params_hopf(p, xs)
        except Exception:
            continue
        if eq.Fprime_eval(ph, xs) >= 0:
            continue
        omega, l1, _ = oracle.lyapunov_coefficients(ph, xs, order=3)
        import alleelab.model as model
        J = model.jacobian((xs, ph.n * xs), ph)
        om2, T = oracle.rotation_frame(J)
        co = model.taylor_coefficients((xs, ph.n * xs), ph, 3)
        fu, fv = oracle.poly_compose_linear(co, T, 3)
        Ti = np.linalg.inv(T)
        P, Q = {}, {}
        for key in set(fu) | set(fv):
            if sum(key) < 2:
                continue
            c1, c2 = fu.get(key, 0.0), fv.get(key, 0.0)
            P[key] = Ti[0, 0] * c1 + Ti[0, 1] * c2
            Q[key] = Ti[1, 0] * c1 + Ti[1, 1] * c2

        def d(poly, i, j):
            return poly.get((i, j), 0.0) * math.factorial(i) * math.factorial(j)

        gh = ((d(P, 3, 0) + d(P, 1, 2) + d(Q, 2, 1) + d(Q, 0, 3)) / 16.0
              + (d(P, 1, 1) * (d(P, 2, 0) + d(P, 0, 2))
                 - d(Q, 1, 1) * (d(Q, 2, 0) + d(Q, 0, 2))
                 - d(P, 2, 0) * d(Q, 2, 0) + d(P, 0, 2) * d(Q, 0, 2)) / (16.0 * omega))
        assert l1 * omega == pytest.approx(gh, rel=1e-9)
        checked += 1


def test_l2_finite_on_model():
    rng = np.random.default_rng(14)
    while True:
        p0 = random_feasible_params(rng)
        xs = rng.uniform(0.05, 0.9) * p0.k
        try:
            p = nf.params_hopf(p0, xs)
        except Exception:
            continue
        if eq.Fprime_eval(p, xs) >= 0:
            continue
        _, l1, l2 = oracle.lyapunov_coefficients(p, xs, order=5)
        assert math.isfinite(l1) and math.isfinite(l2)
        break
