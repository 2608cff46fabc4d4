"""Exact equilibrium algebra.

Positive equilibria lie on y = n x with x a positive root of the quartic

    Fbar(x) = a4 x^4 + a3 x^3 + a2 x^2 + a1 x + a0,

and the growth function F(x) = -x Fbar(x) / h(x), h(x) = k (b+x)(x^2+cx+a),
equals dx/dt restricted to the predator nullcline.  The characteristic data of
the Jacobian at a positive equilibrium reduce to scalar functions of x:
trace = p(x), det = q(x) = -s F'(x).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import model
from .errors import BoundaryCase, DegenerateError, DomainError, IllConditioned
from .model import Params


class Kind(enum.Enum):
    SADDLE = "Saddle"
    STABLE_NODE = "StableNode"
    STABLE_FOCUS = "StableFocus"
    UNSTABLE_NODE = "UnstableNode"
    UNSTABLE_FOCUS = "UnstableFocus"
    LINEAR_CENTER = "LinearCenter"
    SADDLE_NODE = "SaddleNode"
    CUSP_CANDIDATE = "CuspCandidate"
    BOUNDARY = "Boundary"
    DEGENERATE = "Degenerate"
    UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True)
class Equilibrium:
    x: float
    y: float
    multiplicity: int = 1
    kind: Kind = Kind.UNCLASSIFIED

    def point(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class QuarticCoeffs:
    a4: float
    a3: float
    a2: float
    a1: float
    a0: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a4, self.a3, self.a2, self.a1, self.a0])

    def eval(self, x):
        return (((self.a4 * x + self.a3) * x + self.a2) * x + self.a1) * x + self.a0

    def eval_prime(self, x):
        return ((4.0 * self.a4 * x + 3.0 * self.a3) * x + 2.0 * self.a2) * x + self.a1

    def eval_second(self, x):
        return (12.0 * self.a4 * x + 6.0 * self.a3) * x + 2.0 * self.a2

    def magnitude(self, x):
        """Envelope sum |a_i| |x|^i, the natural roundoff scale of eval."""
        ax = abs(x)
        return (((abs(self.a4) * ax + abs(self.a3)) * ax + abs(self.a2)) * ax
                + abs(self.a1)) * ax + abs(self.a0)

    def magnitude_prime(self, x):
        ax = abs(x)
        return ((4 * abs(self.a4) * ax + 3 * abs(self.a3)) * ax + 2 * abs(self.a2)) * ax + abs(self.a1)


def quartic_coeffs(p: Params) -> QuarticCoeffs:
    return QuarticCoeffs(
        a4=p.r,
        a3=p.r * (p.b + p.c - p.k),
        a2=p.r * (p.a + p.b * p.c) + p.k * (-p.r * (p.b + p.c) + p.m + p.n * p.q),
        a1=p.a * p.r * (p.b - p.k) + p.c * p.k * (p.m - p.b * p.r) + p.b * p.k * p.n * p.q,
        a0=p.a * p.k * (p.m - p.b * p.r),
    )


def h_eval(p: Params, x):
    return p.k * (p.b + x) * (x * x + p.c * x + p.a)


def F_eval(p: Params, x):
    co = quartic_coeffs(p)
    return -x * co.eval(x) / h_eval(p, x)


def Fprime_eval(p: Params, x):
    """General derivative of F; reduces to -x Fbar'(x)/h(x) at roots of Fbar."""
    co = quartic_coeffs(p)
    h = h_eval(p, x)
    hp = p.k * ((x * x + p.c * x + p.a) + (p.b + x) * (2.0 * x + p.c))
    N = -x * co.eval(x)
    Np = -co.eval(x) - x * co.eval_prime(x)
    return (Np * h - N * hp) / h**2


def Fsecond_eval(p: Params, x):
    co = quartic_coeffs(p)
    h = h_eval(p, x)
    hp = p.k * ((x * x + p.c * x + p.a) + (p.b + x) * (2.0 * x + p.c))
    hpp = 2.0 * p.k * (p.b + p.c + 3.0 * x)
    N = -x * co.eval(x)
    Np = -co.eval(x) - x * co.eval_prime(x)
    Npp = -2.0 * co.eval_prime(x) - x * co.eval_second(x)
    return (Npp * h * h - N * h * hpp - 2.0 * Np * h * hp + 2.0 * N * hp * hp) / h**3


def p_eval(p: Params, x):
    """Trace of the Jacobian at the positive equilibrium (x, n x)."""
    D = p.a + x * (p.c + x)
    return (p.n * p.q * x * (x * x - p.a) / D**2 - p.b * p.m / (p.b + x) ** 2
            - 2.0 * p.r * x / p.k + p.r - p.s)


def pprime_eval(p: Params, x):
    D = p.a + x * (p.c + x)
    return (p.n * p.q * (-p.a**2 + p.a * x * (p.c + 6.0 * x) + x**3 * (p.c - x)) / D**3
            + 2.0 * p.b * p.m / (p.b + x) ** 3 - 2.0 * p.r / p.k)


def q_eval(p: Params, x):
    """Determinant of the Jacobian at (x, n x); equals -s F'(x) identically."""
    D = p.a + x * (p.c + x)
    return p.s * (p.n * p.q * x * (2.0 * p.a + p.c * x) / D**2
                  + p.b * p.m / (p.b + x) ** 2 + p.r * (2.0 * x / p.k - 1.0))


def _fprime_scale(p: Params, x):
    """Characteristic magnitude of F'(x) for relative zero tests."""
    co = quartic_coeffs(p)
    h = h_eval(p, x)
    return (co.magnitude(x) + abs(x) * co.magnitude_prime(x)) / h


# -- positive equilibria ----------------------------------------------------

CLUSTER_RTOL = 1e-7
DOUBLE_ROOT_FPRIME_RTOL = 1e-6
IMAG_RTOL = 1e-6


def positive_equilibria(p: Params, tol: float | None = None) -> list[Equilibrium]:
    """All positive roots of the quartic, clustered by numeric multiplicity.

    Roots come from the companion-matrix eigensolve, are polished by Newton
    (on Fbar' for tangency clusters), and are paired with y = n x.
    """
    if tol is None:
        tol = 1e-10 * p.k
    if tol <= 0:
        raise DomainError("tol must be positive")
    co = quartic_coeffs(p)
    try:
        roots = np.roots(co.as_array())
    except np.linalg.LinAlgError as e:  # pragma: no cover - exotic failure
        raise IllConditioned(f"companion eigensolve failed: {e}") from e
    cands = []
    for z in roots:
        if abs(z.imag) > IMAG_RTOL * (1.0 + abs(z)):
            continue
        x = z.real
        for _ in range(3):
            fp = co.eval_prime(x)
            if fp == 0.0:
                break
            step = co.eval(x) / fp
            # near a multiple root Newton's full step overshoots wildly once
            # |Fbar'| is roundoff; keep the polish bounded
            if abs(step) > 0.1 * (1.0 + abs(x)):
                break
            x -= step
        if x > tol and abs(co.eval(x)) <= 1e-6 * max(co.magnitude(x), 1e-300):
            cands.append(x)
    cands.sort()
    out: list[Equilibrium] = []
    i = 0
    while i < len(cands):
        j = i + 1
        while j < len(cands) and cands[j] - cands[j - 1] <= CLUSTER_RTOL * (1.0 + abs(cands[j])):
            j += 1
        cluster = cands[i:j]
        x = sum(cluster) / len(cluster)
        mult = len(cluster)
        if mult >= 2:
            # polish the tangency point on Fbar' (double) or Fbar'' (triple)
            g = co.eval_prime if mult < 3 else co.eval_second
            gp = co.eval_second if mult < 3 else (lambda t: 24.0 * co.a4 * t + 6.0 * co.a3)
            for _ in range(8):
                d = gp(x)
                if d == 0.0:
                    break
                x -= g(x) / d
            if mult == 2 and abs(co.eval_prime(x)) > DOUBLE_ROOT_FPRIME_RTOL * max(
                co.magnitude_prime(x), 1e-300
            ):
                mult = 1  # cluster was two distinct roots after all
        out.append(Equilibrium(x=x, y=p.n * x, multiplicity=mult))
        i = j
    return out


# -- boundary equilibria -----------------------------------------------------

def boundary_equilibria(p: Params) -> list[Equilibrium]:
    """Equilibria on the prey axis, by the closed-form case split.

    On y = 0 the prey equation reduces to the quadratic
    x^2 - (k-b) x + (m k / r - k b) = 0 with discriminant (b+k)^2 - 4 k m / r.
    """
    r, k, b, m = p.r, p.k, p.b, p.m
    thresh = r * (b + k) ** 2 / (4.0 * k)
    disc = (b + k) ** 2 - 4.0 * k * m / r
    out = []
    if abs(m - thresh) <= 1e-12 * thresh:
        x = (k - b) / 2.0
        if x > 0:
            out.append(Equilibrium(x=x, y=0.0, multiplicity=2, kind=Kind.DEGENERATE))
        return out
    if m > thresh:
        return out
    sq = math.sqrt(disc)
    for x in ((k - b - sq) / 2.0, (k - b + sq) / 2.0):
        if x <= 0:
            continue
        J = model.jacobian((x, 0.0), p)
        # triangular: eigenvalues J11 and s > 0
        kind = Kind.SADDLE if J[0, 0] < 0 else Kind.UNSTABLE_NODE
        if J[0, 0] == 0.0:
            kind = Kind.DEGENERATE
        out.append(Equilibrium(x=x, y=0.0, multiplicity=1, kind=kind))
    return out


# -- local classification ----------------------------------------------------

def classify(p: Params, e: Equilibrium, tol_rel: float = 1e-8) -> Equilibrium:
    """Assign the local type of a simple positive equilibrium.

    Signs of F'(x) and p(x) decide saddle/attractor/repeller; the discriminant
    p^2 - 4q separates focus from node.  Degenerate F' is routed to the
    normal-form module instead.
    """
    x = e.x
    fp = Fprime_eval(p, x)
    if abs(fp) <= tol_rel * _fprime_scale(p, x):
        raise DegenerateError(
            f"|F'({x})| = {abs(fp):.3e} below tolerance; use normal_forms instead")
    if fp > 0:
        return replace(e, kind=Kind.SADDLE)
    tr = p_eval(p, x)
    det = q_eval(p, x)
    disc = tr * tr - 4.0 * det
    tr_scale = abs(p.r) + abs(p.s) + abs(tr)
    if abs(tr) <= tol_rel * tr_scale:
        return replace(e, kind=Kind.LINEAR_CENTER)
    if tr < 0:
        return replace(e, kind=Kind.STABLE_FOCUS if disc < 0 else Kind.STABLE_NODE)
    return replace(e, kind=Kind.UNSTABLE_FOCUS if disc < 0 else Kind.UNSTABLE_NODE)


# -- origin classification via blow-up ---------------------------------------

class OriginRegion(enum.Enum):
    I_ATTRACTOR = "I_Attractor"
    II_HYP_PLUS_PARABOLIC = "II_HypPlusParabolic"
    III_SADDLE = "III_Saddle"


@dataclass(frozen=True)
class OriginClass:
    region: OriginRegion
    blowup_eigs: dict = field(default_factory=dict)
    v_star: float | None = None


def classify_origin(p: Params) -> OriginClass:
    """Sector structure of the origin of the rescaled field.

    The polar blow-up has up to three equilibria on the u = 0 arc, at angles
    0, pi/2 and v* = arctan(n (m + b(s-r)) / (b s)); their Jacobians are
    triangular with closed-form diagonals.
    """
    a, k, n, b, s, r, m = p.a, p.k, p.n, p.b, p.s, p.r, p.m
    s1 = b * r - m
    s2 = m + b * (s - r)
    tol = 1e-9 * max(b * r, m)
    if abs(s1) <= tol or abs(s2) <= tol * max(1.0, b * s / max(b * r, m)):
        raise BoundaryCase(
            f"origin classification inside roundoff band: br-m={s1:.3e}, m+b(s-r)={s2:.3e}")
    eigs = {
        "v0": (a * k * n * s1, a * k * n * s2),
        "v_pi_2": (-a * b * k * s, a * b * k * s),
    }
    v_star = None
    if s2 > 0:
        t = n * s2 / (b * s)
        v_star = math.atan(t)
        sq = math.sqrt(t * t + 1.0)
        eigs["v_star"] = (a * k * n * s1 / sq, -a * k * n * s2 / sq)
    if s1 < 0:
        region = OriginRegion.I_ATTRACTOR
    elif s2 > 0:
        region = OriginRegion.II_HYP_PLUS_PARABOLIC
    else:
        region = OriginRegion.III_SADDLE
    return OriginClass(region=region, blowup_eigs=eigs, v_star=v_star)
