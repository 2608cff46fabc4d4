"""Numeric normal-form oracle: Lyapunov quantities from exact Taylor data.

Independent of any closed-form coefficient transcription.  Given the planar
field at an equilibrium with eigenvalues +/- i omega, it

1. transforms the exact Taylor expansion to the rotation frame
   u' = -omega v + P(u, v),  v' = omega u + Q(u, v), and
2. solves order by order for a Poincare-Lyapunov function
   V = (u^2+v^2)/2 + V3 + ... + V6 with  dV/dt = eta4 rho^4 + eta6 rho^6,
   rho^2 = u^2+v^2.

eta4/omega is the first Lyapunov coefficient in the standard normalization
(for zdot = i omega z + sigma z|z|^2 it returns sigma/omega); eta6/omega is a
positive multiple of the second coefficient and is used for its sign and a
zero test only.
"""

from __future__ import annotations

import math

import numpy as np

from . import model
from .errors import NotHopf
from .model import Params

Poly = dict  # {(i, j): coefficient} representing sum c u^i v^j


def poly_compose_linear(coeffs: dict, T: np.ndarray, order: int) -> tuple[Poly, Poly]:
    """Rewrite a bivariate Taylor dict under (X, Y) = T (u, v).

    ``coeffs`` maps (i, j) -> (c1, c2) for the monomial X^i Y^j.  Returns the
    two component polynomials in (u, v) up to total degree ``order``.
    """
    # powers of the two linear forms X = t00 u + t01 v, Y = t10 u + t11 v
    def form_powers(t_u, t_v, nmax):
        pws = [{(0, 0): 1.0}]
        base = {}
        if t_u != 0.0:
            base[(1, 0)] = t_u
        if t_v != 0.0:
            base[(0, 1)] = t_v
        for _ in range(nmax):
            pws.append(poly_mul(pws[-1], base))
        return pws

    nmax = order
    Xp = form_powers(T[0, 0], T[0, 1], nmax)
    Yp = form_powers(T[1, 0], T[1, 1], nmax)
    out1: Poly = {}
    out2: Poly = {}
    for (i, j), (c1, c2) in coeffs.items():
        if i + j > order:
            continue
        mono = poly_mul(Xp[i], Yp[j])
        for key, v in mono.items():
            if c1 != 0.0:
                out1[key] = out1.get(key, 0.0) + c1 * v
            if c2 != 0.0:
                out2[key] = out2.get(key, 0.0) + c2 * v
    return out1, out2


def poly_mul(p1: Poly, p2: Poly) -> Poly:
    out: Poly = {}
    for (i1, j1), c1 in p1.items():
        for (i2, j2), c2 in p2.items():
            key = (i1 + i2, j1 + j2)
            out[key] = out.get(key, 0.0) + c1 * c2
    return out


def _monomials(degree: int):
    return [(degree - j, j) for j in range(degree + 1)]


def focal_values(P: Poly, Q: Poly, omega: float) -> tuple[float, float]:
    """eta4 and eta6 of the field (-omega v + P, omega u + Q).

    P and Q hold the nonlinear terms (total degree >= 2) as monomial dicts.
    Terms above degree 5 do not influence the result and are ignored.
    """
    V = {(2, 0): 0.5, (0, 2): 0.5}
    etas = {}
    for degree in range(3, 7):
        monos = _monomials(degree)
        idx = {mn: i for i, mn in enumerate(monos)}
        nm = len(monos)
        # rotation operator L(Vd) = -omega v dVd/du + omega u dVd/dv
        L = np.zeros((nm, nm))
        for col, (i, j) in enumerate(monos):
            if i >= 1:
                L[idx[(i - 1, j + 1)], col] += -omega * i
            if j >= 1:
                L[idx[(i + 1, j - 1)], col] += omega * j
        # known inhomogeneity: gradients of lower-degree V against (P, Q)
        K = np.zeros(nm)
        for (i, j), c in V.items():
            if i >= 1:
                for (pi, pj), pc in P.items():
                    key = (i - 1 + pi, j + pj)
                    if pi + pj >= 2 and i - 1 + pi + j + pj == degree:
                        K[idx[key]] += c * i * pc
            if j >= 1:
                for (qi, qj), qc in Q.items():
                    key = (i + qi, j - 1 + qj)
                    if qi + qj >= 2 and i + qi + j - 1 + qj == degree:
                        K[idx[key]] += c * j * qc
        if degree % 2 == 1:
            sol = np.linalg.solve(L, -K)
            for mn, v in zip(monos, sol):
                if v != 0.0:
                    V[mn] = V.get(mn, 0.0) + v
        else:
            # augment with the radial monomial (u^2+v^2)^(degree/2)
            r_vec = np.zeros(nm)
            half = degree // 2
            for t in range(half + 1):
                r_vec[idx[(2 * (half - t), 2 * t)]] = math.comb(half, t)
            A = np.hstack([L, r_vec[:, None]])
            sol, *_ = np.linalg.lstsq(A, -K, rcond=None)
            for mn, v in zip(monos, sol[:-1]):
                if v != 0.0:
                    V[mn] = V.get(mn, 0.0) + v
            etas[degree] = -sol[-1]
    return etas[4], etas[6]


def rotation_frame(J: np.ndarray) -> tuple[float, np.ndarray]:
    """omega and the real matrix T with T^-1 J T = [[0, -omega], [omega, 0]].

    Requires trace(J) ~ 0 and det(J) > 0; columns of T are (Im w, Re w) for
    the eigenvector w of +i omega.
    """
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    tr = J[0, 0] + J[1, 1]
    if det <= 0:
        raise NotHopf(f"det(J) = {det} <= 0")
    omega = math.sqrt(det - 0.25 * tr * tr) if det > 0.25 * tr * tr else math.sqrt(det)
    # eigenvector of J for i*omega (using the shifted matrix with zero trace)
    A = J - 0.5 * tr * np.eye(2)
    if abs(A[0, 1]) >= abs(A[1, 0]):
        w = np.array([A[0, 1], 1j * omega - A[0, 0]])
    else:
        w = np.array([1j * omega - A[1, 1], A[1, 0]])
    T = np.column_stack([w.imag, w.real])
    if abs(np.linalg.det(T)) < 1e-14 * (np.linalg.norm(T) ** 2 + 1e-300):
        raise NotHopf("degenerate eigenframe")
    return omega, T


def lyapunov_coefficients(p: Params, xstar: float, order: int = 3) -> tuple[float, float, float]:
    """(omega, l1, l2) at the equilibrium (xstar, n xstar).

    order=3 computes l1 only (l2 returned as nan); order=5 computes both.
    The trace is not re-checked here beyond det > 0; callers enforce the Hopf
    conditions at their own tolerance.
    """
    if order not in (3, 5):
        raise ValueError("order must be 3 or 5")
    J = model.jacobian((xstar, p.n * xstar), p)
    omega, T = rotation_frame(J)
    coeffs = model.taylor_coefficients((xstar, p.n * xstar), p, order)
    Tinv = np.linalg.inv(T)
    f_u, f_v = poly_compose_linear(coeffs, T, order)
    # components in the rotated frame: (P, Q) = T^-1 (f1, f2), nonlinear parts
    P: Poly = {}
    Q: Poly = {}
    for key in set(f_u) | set(f_v):
        if sum(key) < 2:
            continue
        c1 = f_u.get(key, 0.0)
        c2 = f_v.get(key, 0.0)
        P[key] = Tinv[0, 0] * c1 + Tinv[0, 1] * c2
        Q[key] = Tinv[1, 0] * c1 + Tinv[1, 1] * c2
    if order == 3:
        P = {k: v for k, v in P.items() if sum(k) <= 3}
        Q = {k: v for k, v in Q.items() if sum(k) <= 3}
    eta4, eta6 = focal_values(P, Q, omega)
    l1 = eta4 / omega
    l2 = eta6 / omega if order == 5 else math.nan
    return omega, l1, l2


def focal_values_of_system(P: Poly, Q: Poly, omega: float) -> tuple[float, float]:
    """Expose the raw algorithm for self-tests on canonical normal forms."""
    return focal_values(P, Q, omega)
