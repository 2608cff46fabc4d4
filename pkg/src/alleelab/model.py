"""Vector field of the predator-prey model and its exact derivatives.

The raw field is

    dx/dt = (r (1 - x/k) - m/(x+b)) x - q x y / (x^2 + c x + a)
    dy/dt = s y (1 - y/(n x))

on x > 0, y >= 0.  The rescaled field multiplies the raw one by the positive
factor k n x (x+b)(x^2+cx+a), which removes the 1/x and 1/(x+b) singularities
and extends the flow polynomially to the closed first quadrant.

All derivative information (Jacobians, the symmetric multilinear forms used by
normal-form computations, and full Taylor expansions at a point) is computed
from closed forms, not finite differences.  The x-dependence of the raw field
sits in three elementary profiles, x/(x+b), qx/(x^2+cx+a) and 1/x, and each
admits an exact derivative recurrence of arbitrary order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError

PARAM_NAMES = ("r", "s", "k", "q", "a", "n", "m", "b", "c")


@dataclass(frozen=True)
class Params:
    """The nine model constants.

    r, s: prey/predator intrinsic growth rates; k: prey carrying capacity;
    q, a, c: capture-rate profile q x/(x^2+cx+a); n: predator carrying-capacity
    proportionality; m, b: additive Allee mortality m x/(x+b).
    """

    r: float
    s: float
    k: float
    q: float
    a: float
    n: float
    m: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("r", "s", "k", "q", "a", "n", "m", "b"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise DomainError(f"parameter {name}={v!r} must be finite and > 0")
        if not math.isfinite(self.c):
            raise DomainError(f"parameter c={self.c!r} must be finite")
        if self.c <= -2.0 * math.sqrt(self.a):
            raise DomainError(
                f"parameter c={self.c} violates c > -2*sqrt(a) = {-2.0 * math.sqrt(self.a)}"
            )

    def allee_strong(self) -> bool:
        return self.m > self.b * self.r

    def allee_weak(self) -> bool:
        return 0.0 < self.m < self.b * self.r

    def with_(self, **kw) -> "Params":
        return replace(self, **kw)

    def get(self, name: str) -> float:
        return getattr(self, name)

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_NAMES}


@dataclass(frozen=True)
class State:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DomainError(f"state ({self.x}, {self.y}) must be finite")


def _xy(state):
    if isinstance(state, State):
        return state.x, state.y
    x, y = state
    return float(x), float(y)


# -- raw field -------------------------------------------------------------

def rhs(state, p: Params) -> np.ndarray:
    """Raw vector field; requires x > 0."""
    x, y = _xy(state)
    if x <= 0.0:
        raise DomainError(f"raw field undefined at x={x} <= 0")
    f1 = (p.r * (1.0 - x / p.k) - p.m / (x + p.b)) * x - p.q * x * y / (x * x + p.c * x + p.a)
    f2 = p.s * y * (1.0 - y / (p.n * x))
    return np.array([f1, f2])


def rhs_vec(x, y, p: Params):
    """Raw field on arrays (no domain check; caller keeps x > 0)."""
    denom = x * x + p.c * x + p.a
    f1 = (p.r * (1.0 - x / p.k) - p.m / (x + p.b)) * x - p.q * x * y / denom
    f2 = p.s * y * (1.0 - y / (p.n * x))
    return f1, f2


def jacobian(state, p: Params) -> np.ndarray:
    """Exact Jacobian of the raw field; requires x > 0."""
    x, y = _xy(state)
    if x <= 0.0:
        raise DomainError(f"raw-field Jacobian undefined at x={x} <= 0")
    return np.array(jacobian_vec(x, y, p))


def jacobian_vec(x, y, p: Params):
    """Jacobian entries of the raw field on arrays: ((J11, J12), (J21, J22))."""
    D = x * x + p.c * x + p.a
    j11 = p.r - 2.0 * p.r * x / p.k - p.m * p.b / (x + p.b) ** 2 + p.q * y * (x * x - p.a) / D**2
    j12 = -p.q * x / D
    j21 = p.s * y * y / (p.n * x * x)
    j22 = p.s * (1.0 - 2.0 * y / (p.n * x))
    return (j11, j12), (j21, j22)


_RAW_PARAM_DERIVS = {
    "r": lambda x, y, p, D: (x * (1.0 - x / p.k), 0.0 * y),
    "s": lambda x, y, p, D: (0.0 * x, y * (1.0 - y / (p.n * x))),
    "k": lambda x, y, p, D: (p.r * x * x / p.k**2, 0.0 * y),
    "q": lambda x, y, p, D: (-x * y / D, 0.0 * y),
    "a": lambda x, y, p, D: (p.q * x * y / D**2, 0.0 * y),
    "n": lambda x, y, p, D: (0.0 * x, p.s * y * y / (p.n**2 * x)),
    "m": lambda x, y, p, D: (-x / (x + p.b), 0.0 * y),
    "b": lambda x, y, p, D: (p.m * x / (x + p.b) ** 2, 0.0 * y),
    "c": lambda x, y, p, D: (p.q * x * x * y / D**2, 0.0 * y),
}


def rhs_param_deriv(x, y, p: Params, name: str):
    """Exact d(raw field)/d(parameter) on arrays."""
    D = x * x + p.c * x + p.a
    return _RAW_PARAM_DERIVS[name](x, y, p, D)


# -- rescaled field --------------------------------------------------------

def scale_factor(state, p: Params) -> float:
    """Positive time-rescaling factor k n x (x+b)(x^2+cx+a) for x > 0."""
    x, _ = _xy(state)
    return p.k * p.n * x * (x + p.b) * (x * x + p.c * x + p.a)


def rhs_rescaled(state, p: Params) -> np.ndarray:
    """Polynomial field, defined on the whole closed quadrant."""
    x, y = _xy(state)
    return np.array(rhs_rescaled_vec(x, y, p))


def rhs_rescaled_vec(x, y, p: Params):
    D = x * x + p.c * x + p.a
    G = p.r * (x + p.b) * (p.k - x) - p.m * p.k
    f1 = p.n * x * x * D * G - p.k * p.n * p.q * (x + p.b) * x * x * y
    f2 = p.k * p.s * y * (x + p.b) * D * (p.n * x - y)
    return f1, f2


def jacobian_rescaled(state, p: Params) -> np.ndarray:
    x, y = _xy(state)
    return np.array(jacobian_rescaled_vec(x, y, p))


def jacobian_rescaled_vec(x, y, p: Params):
    D = x * x + p.c * x + p.a
    Dp = 2.0 * x + p.c
    P = x * x * D
    Pp = 4.0 * x**3 + 3.0 * p.c * x * x + 2.0 * p.a * x
    G = p.r * (x + p.b) * (p.k - x) - p.m * p.k
    Gp = p.r * (p.k - p.b - 2.0 * x)
    Q = (x + p.b) * D
    Qp = D + (x + p.b) * Dp
    j11 = p.n * (Pp * G + P * Gp) - p.k * p.n * p.q * y * (3.0 * x * x + 2.0 * p.b * x)
    j12 = -p.k * p.n * p.q * (x + p.b) * x * x
    j21 = p.k * p.s * y * (Qp * (p.n * x - y) + Q * p.n)
    j22 = p.k * p.s * Q * (p.n * x - 2.0 * y)
    return (j11, j12), (j21, j22)


def rhs_rescaled_param_deriv(x, y, p: Params, name: str):
    """Exact d(rescaled field)/d(parameter) on arrays."""
    D = x * x + p.c * x + p.a
    P = x * x * D
    G = p.r * (x + p.b) * (p.k - x) - p.m * p.k
    Q = (x + p.b) * D
    zero = 0.0 * (x + y)
    if name == "r":
        return p.n * P * (x + p.b) * (p.k - x), zero
    if name == "m":
        return -p.n * P * p.k, zero
    if name == "k":
        return (p.n * P * (p.r * (x + p.b) - p.m) - p.n * p.q * (x + p.b) * x * x * y,
                p.s * y * Q * (p.n * x - y))
    if name == "b":
        return (p.n * P * p.r * (p.k - x) - p.k * p.n * p.q * x * x * y,
                p.k * p.s * y * D * (p.n * x - y))
    if name == "a":
        return (p.n * x * x * G, p.k * p.s * y * (x + p.b) * (p.n * x - y))
    if name == "c":
        return (p.n * x**3 * G, p.k * p.s * y * (x + p.b) * x * (p.n * x - y))
    if name == "q":
        return -p.k * p.n * (x + p.b) * x * x * y, zero
    if name == "n":
        return (P * G - p.k * p.q * (x + p.b) * x * x * y, p.k * p.s * y * Q * x)
    if name == "s":
        return zero, p.k * y * Q * (p.n * x - y)
    raise KeyError(name)


# -- exact Taylor expansions ------------------------------------------------

def _allee_profile_derivs(x: float, p: Params, order: int) -> list:
    """d^i/dx^i of x/(x+b) at x, i = 0..order."""
    out = [x / (x + p.b)]
    for i in range(1, order + 1):
        out.append((-1.0) ** (i + 1) * math.factorial(i) * p.b / (x + p.b) ** (i + 1))
    return out


def _capture_profile_derivs(x: float, p: Params, order: int) -> list:
    """d^i/dx^i of q x/(x^2+cx+a) at x, via the recurrence from (D w)' algebra."""
    D = x * x + p.c * x + p.a
    Dp = 2.0 * x + p.c
    w = [p.q * x / D]
    if order >= 1:
        w.append((p.q - Dp * w[0]) / D)
    for i in range(2, order + 1):
        w.append(-(i * Dp * w[i - 1] + i * (i - 1) * w[i - 2]) / D)
    return w


def taylor_coefficients(state, p: Params, order: int) -> dict:
    """Exact Taylor coefficients of the raw field around ``state``.

    Returns {(i, j): (c1, c2)} with f(x0+X, y0+Y) = sum c X^i Y^j for
    1 <= i+j <= order (the constant term is omitted; at an equilibrium it
    vanishes).  f1 is affine in y and f2 quadratic in y, so j <= 2.
    """
    x0, y0 = _xy(state)
    if x0 <= 0.0:
        raise DomainError(f"Taylor expansion of the raw field needs x={x0} > 0")
    allee = _allee_profile_derivs(x0, p, order)
    capt = _capture_profile_derivs(x0, p, order)
    coeffs = {}
    for i in range(order + 1):
        fact = math.factorial(i)
        # f1 = r x - (r/k) x^2 - m * allee(x) - y * capture(x)
        g_i = -p.m * allee[i]
        if i == 0:
            g_i += p.r * x0 - p.r * x0 * x0 / p.k
        elif i == 1:
            g_i += p.r - 2.0 * p.r * x0 / p.k
        elif i == 2:
            g_i += -2.0 * p.r / p.k
        c1_i0 = (g_i - y0 * capt[i]) / fact
        c1_i1 = -capt[i] / fact
        # f2 = s y - (s/n) y^2 / x ; d^i (1/x) = (-1)^i i! / x^{i+1}
        inv_i = (-1.0) ** i / x0 ** (i + 1)  # d^i(1/x)/i!
        c2_i0 = -(p.s / p.n) * y0 * y0 * inv_i
        c2_i1 = -(p.s / p.n) * 2.0 * y0 * inv_i + (p.s if i == 0 else 0.0)
        c2_i2 = -(p.s / p.n) * inv_i
        for j, (c1, c2) in (((0, (c1_i0, c2_i0))), ((1, (c1_i1, c2_i1))), ((2, (0.0, c2_i2)))):
            if 1 <= i + j <= order:
                coeffs[(i, j)] = (c1, c2)
    return coeffs


def derivatives_k(state, p: Params, order: int) -> np.ndarray:
    """Symmetric multilinear form of the raw field at ``state``.

    order=2 returns B with B[i, j, k] = d^2 f_i / dz_j dz_k; order=3 returns
    C with one more index.  Contract with vectors via einsum.
    """
    if order not in (2, 3):
        raise DomainError(f"order must be 2 or 3, got {order}")
    coeffs = taylor_coefficients(state, p, order)
    T = np.zeros((2,) * (order + 1))
    for (i, j), (c1, c2) in coeffs.items():
        if i + j != order:
            continue
        # monomial X^i Y^j contributes c * i! * j! to each index arrangement
        val = np.array([c1, c2]) * math.factorial(i) * math.factorial(j)
        idx_sets = _index_arrangements(i, j)
        for idx in idx_sets:
            T[(slice(None),) + idx] = val
    return T


def _index_arrangements(i: int, j: int):
    """All placements of i x-indices and j y-indices into i+j slots."""
    from itertools import permutations

    base = (0,) * i + (1,) * j
    return set(permutations(base))


def divergence_vec(x, y, p: Params):
    (j11, _), (_, j22) = jacobian_vec(x, y, p)
    return j11 + j22
