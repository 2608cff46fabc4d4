"""Degeneracy tests and normal-form scalars at positive equilibria.

Covers the saddle-node/cusp hierarchy at double roots of the quartic, the
nondegeneracy scalars of the codimension-2 and codimension-3 double-zero
(Bogdanov-Takens) points, and the first/second Lyapunov coefficients at Hopf
points.  Every closed-form scalar transcribed here is cross-checked by a
numeric route: the projection/focal-value oracle in :mod:`alleelab.oracle`
for Lyapunov signs, and generic coefficient-combination chains fed by exact
Taylor data for the double-zero quantities.

All zero tests are relative: |value| <= ZTOL * (characteristic scale), where
the scale comes from degree counting (every transcribed polynomial is
homogeneous once a carries twice the weight of b, c, k and x).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import equilibria, model, oracle
from .errors import ConditionsNotMet, DomainError, NotDegenerate, NotDegenerateHopf, NotHopf
from .model import Params

ZTOL = 1e-8


class Verdict(enum.Enum):
    REGULAR = "Regular"
    SADDLE_NODE = "SaddleNode"
    CUSP2 = "Cusp2"
    CUSP3 = "Cusp3"
    BTDEG2_OK = "BTdeg2_OK"
    BTDEG3_OK = "BTdeg3_OK"
    DEGENERATE_BEYOND = "Degenerate_beyond"


@dataclass
class DegeneracyReport:
    F: float
    Fprime: float
    Fsecond: float
    p: float
    pprime: float
    verdict: Verdict
    b_minus: float = math.nan
    b_plus: float = math.nan
    b_star_minus: float = math.nan
    b_star_plus: float = math.nan
    u1: float = math.nan
    u2: float = math.nan
    u3: float = math.nan
    N1: float = math.nan
    N2: float = math.nan
    N3: float = math.nan


@dataclass
class LyapunovReport:
    eta11: float
    eta1_sign: int
    l1_numeric: float
    omega: float
    l2_numeric: float = math.nan


def _length_scale(p: Params, x: float) -> float:
    return max(math.sqrt(p.a), abs(p.b), abs(p.c), p.k, abs(x))


def _length_scale_nok(p: Params, x: float) -> float:
    # the N and b-exclusion polynomials do not involve k
    return max(math.sqrt(p.a), abs(p.b), abs(p.c), abs(x))


# ---------------------------------------------------------------------------
# Transcribed coefficient polynomials.  Variables: a, c and x = x* (and b, k
# where stated).  Each is homogeneous under (a, b, c, k, x) ->
# (t^2 a, t b, t c, t k, t x); the stated degree is frozen in the tests.


def cusp3_B(a, c, x):
    """Degree 12; denominator polynomial of the codim-3 cusp exclusions."""
    return (a**6
            + a**5 * x * (5 * c + 3 * x)
            + 2 * a**4 * x**2 * (5 * c**2 + 14 * c * x + 18 * x**2)
            - a**3 * x**4 * (7 * c**2 + 14 * c * x + 30 * x**2)
            - a**2 * x**4 * (12 * c**4 + 97 * c**3 * x + 309 * c**2 * x**2
                             + 476 * c * x**3 + 275 * x**4)
            + a * x**6 * (4 * c**4 + 34 * c**3 * x + 119 * c**2 * x**2
                          + 217 * c * x**3 + 155 * x**4)
            - x**9 * (c**3 + 5 * c**2 * x + 16 * c * x**2 + 18 * x**3))


def cusp3_C(a, c, x):
    """Degree 12; the -332 a x**10 term restores homogeneity of the source."""
    return (-a**5 * c * x + 20 * a**5 * x**2
            - 29 * a**4 * c**2 * x**2 - 105 * a**4 * c * x**3 - 184 * a**4 * x**4
            - 43 * a**3 * c**3 * x**3 - 280 * a**3 * c**2 * x**4
            - 670 * a**3 * c * x**5 - 424 * a**3 * x**6
            + 9 * a**2 * c**4 * x**4 + 91 * a**2 * c**3 * x**5
            + 450 * a**2 * c**2 * x**6 + 1138 * a**2 * c * x**7 + 960 * a**2 * x**8
            - 6 * a * c**4 * x**6 - 21 * a * c**3 * x**7 - 40 * a * c**2 * x**8
            - 225 * a * c * x**9 - 332 * a * x**10
            + c**4 * x**8 + 5 * c**3 * x**9 - 5 * c**2 * x**10 - 9 * c * x**11
            + 24 * x**12)


def cusp3_E(a, c, x):
    """Degree 16; product of the codim-3 'm > 0' factor and a degree-12 part."""
    first = bt3_N1(a, c, x)
    second = (8 * a**6
              + 8 * a**5 * x * (7 * c + 29 * x)
              - a**4 * x**2 * (23 * c**2 + 216 * c * x + 848 * x**2)
              + a**3 * x**3 * (27 * c**3 + 296 * c**2 * x + 1256 * c * x**2 + 2416 * x**3)
              - a**2 * x**5 * (27 * c**3 + 142 * c**2 * x + 840 * c * x**2 + 2216 * x**3)
              + a * x**7 * (9 * c**3 - 80 * c**2 * x - 208 * c * x**2 + 520 * x**3)
              + x**9 * (-(c**3 + 3 * c**2 * x - 48 * c * x**2 + 48 * x**3)))
    return first * second


def cusp3_b_pm(a, c, x):
    """Roots (b-, b+) excluded by the codim-3 cusp condition; nan if complex."""
    B = cusp3_B(a, c, x)
    C = cusp3_C(a, c, x)
    E = cusp3_E(a, c, x)
    if E < 0 or B == 0.0:
        return math.nan, math.nan
    lo = x * (C - (a + x * (c + x)) ** 2 * math.sqrt(E)) / (4 * B)
    hi = x * (C + (a + x * (c + x)) ** 2 * math.sqrt(E)) / (4 * B)
    return min(lo, hi), max(lo, hi)


def bt2_u1(a, b, c, k, x):
    """Degree 5."""
    return (a**2 * k
            + a * (b**2 * (c + 3 * x) - b * (c + 3 * x) * (k - 3 * x)
                   + x**2 * (3 * c - 3 * k + 8 * x))
            + x**3 * (-(b - c)) * (b + c - k + 3 * x))


def bt2_u2(a, b, c, k, x):
    """Degree 6."""
    return (a**2 * (b**2 - b * k + 4 * b * x + 4 * x**2)
            + a * x * (4 * x**2 * (3 * b + 2 * c - k) - k * x * (4 * b + c)
                       + 2 * b * c * (b - k) + b * x * (4 * b + 7 * c) + 12 * x**3)
            + x**4 * (c - b) * (b + 2 * c - k + 4 * x))


def bt2_u3(a, b, c, k, x):
    """Degree 6."""
    return (a**2 * (b**2 - b * (k - 3 * x) + x * (k + 2 * x))
            + a * x * (3 * b**2 * (c + 2 * x) - 3 * b * (c + 2 * x) * (k - 3 * x)
                       + x * (-c * k + 8 * c * x - 6 * k * x + 16 * x**2))
            + x**3 * (-b**2 * (c + 3 * x) + b * (c + 3 * x) * (k - 3 * x)
                      + x * (2 * c**2 - c * k + 4 * c * x + k * x - 2 * x**2)))


def bt2_k_excluded(a, b, c, x):
    """The single k value excluded by the codim-2 double-zero theorem."""
    num = (a**2 * (b + 2 * x) ** 2
           + a * x * (2 * b**2 * (c + 2 * x) + b * x * (7 * c + 12 * x)
                      + 4 * x**2 * (2 * c + 3 * x))
           - (b - c) * x**4 * (b + 2 * c + 4 * x))
    den = a**2 * b + a * x * (2 * b * (c + 2 * x) + x * (c + 4 * x)) + x**4 * (c - b)
    return num / den


def bt3_N1(a, c, x):
    """Degree 4; also the positivity factor of the codim-3 m-expression."""
    return a**2 + 3 * a * x * (c + 2 * x) - x**3 * (c + 3 * x)


def bt3_N2(a, b, c, x):
    """Degree 8; quadratic in b with roots b*-, b*+."""
    return (-a**3 * (b - x) * (2 * b + 3 * x)
            + a**2 * x * (-7 * b**2 * c + x**2 * (b + 5 * c) - 6 * b * x * (b + c) + 9 * x**3)
            - a * x**2 * (2 * x**2 * (15 * b**2 + 20 * b * c + c**2) + 9 * b**2 * c**2
                          + 3 * x**3 * (17 * b + 4 * c) + b * c * x * (28 * b + 13 * c)
                          + 23 * x**4)
            + x**4 * (b**2 * c**2 + x**3 * (11 * b - c) + 6 * b * x**2 * (b + c)
                      + 3 * b * c * x * (b + c) + 3 * x**4))


def bt3_N3(a, b, c, x):
    """Degree 14; quadratic in b with roots b-, b+."""
    return (a**6 * (2 * b**2 - x**2)
            + a**5 * x * (2 * b**2 * (5 * c + 3 * x) + b * x * (c - 20 * x)
                          - 9 * x**2 * (c + 4 * x))
            + a**4 * x**2 * (3 * x**2 * (24 * b**2 + 35 * b * c - 3 * c**2)
                             + 20 * b**2 * c**2 + x**3 * (184 * b - 63 * c)
                             + b * c * x * (56 * b + 29 * c) - 17 * x**4)
            + a**3 * x**4 * (-2 * b**2 * (7 * c**2 + 14 * c * x + 30 * x**2)
                             + b * (43 * c**3 + 280 * c**2 * x + 670 * c * x**2
                                    + 424 * x**3)
                             + x * (11 * c**3 + 78 * c**2 * x + 330 * c * x**2
                                    + 344 * x**3))
            - a**2 * x**4 * (24 * b**2 * c**4
                             + 2 * x**4 * (275 * b**2 + 569 * b * c + 18 * c**2)
                             + c * x**3 * (952 * b**2 + 450 * b * c + 9 * c**2)
                             + b * c**3 * x * (194 * b + 9 * c)
                             + b * c**2 * x**2 * (618 * b + 91 * c)
                             + 6 * x**5 * (160 * b + 39 * c) + 363 * x**6)
            + a * x**6 * (8 * b**2 * c**4
                          + 5 * x**4 * (62 * b**2 + 45 * b * c - 6 * c**2)
                          + c * x**3 * (434 * b**2 + 40 * b * c + c**2)
                          + 2 * b * c**3 * x * (34 * b + 3 * c)
                          + 7 * b * c**2 * x**2 * (34 * b + 3 * c)
                          + x**5 * (332 * b - 33 * c) + 76 * x**6)
            + x**9 * (-3 * x**3 * (12 * b**2 - 3 * b * c + c**2)
                      + c * x**2 * (-32 * b**2 + 5 * b * c - 3 * c**2)
                      - b * c**3 * (2 * b + c) - 5 * b * c**2 * x * (2 * b + c)
                      + 3 * x**4 * (3 * c - 8 * b) - 3 * x**5))


def bt3_lmn(a, c, x):
    """(l, m, n) auxiliaries of the b*-exclusion; local symbols, not model
    parameters.  The x factors in l restore the homogeneity of the source."""
    l = (2 * a**3 + a**2 * x * (7 * c + 6 * x)
         + a * x**2 * (9 * c**2 + 28 * c * x + 30 * x**2)
         - x**4 * (c**2 + 3 * c * x + 6 * x**2))
    m = (a**3 + 6 * a**2 * c * x - a**2 * x**2 + 13 * a * c**2 * x**2
         + 40 * a * c * x**3 + 51 * a * x**4 - 3 * c**2 * x**4 - 6 * c * x**5
         - 11 * x**6)
    n = (25 * a**4 + 2 * a**3 * x * (43 * c + 46 * x)
         + a**2 * x**2 * (97 * c**2 + 274 * c * x + 286 * x**2)
         - 14 * a * x**4 * (5 * c**2 + 17 * c * x + 22 * x**2)
         + x**6 * (9 * c**2 + 22 * c * x + 49 * x**2))
    return l, m, n


def bt3_b_star_pm(a, c, x):
    """Roots (b*-, b*+) excluded by the codim-3 unfolding; nan if complex."""
    l, m, n = bt3_lmn(a, c, x)
    if n < 0 or l == 0.0:
        return math.nan, math.nan
    lo = x * (-m - math.sqrt(n) * (a + x * (c + x))) / (2 * l)
    hi = x * (-m + math.sqrt(n) * (a + x * (c + x))) / (2 * l)
    return min(lo, hi), max(lo, hi)


def eta11_0(a, b, c, k, x):
    """Degree 10."""
    return (a**4 * (-4 * b**2 + b * (4 * k - 9 * x) + x * (k - 4 * x))
            + a**3 * (-x * (3 * b**2 * (8 * b + 7 * c) + k**2 * (16 * b + c)
                            - 10 * b * k * (4 * b + 3 * c))
                      - 2 * x**2 * (41 * b**2 + 4 * b * (6 * c - 11 * k)
                                    + 3 * k * (k - 2 * c))
                      - 4 * b * (b - k) * (b**2 - k * (b + c))
                      - 8 * x**3 * (15 * b + 3 * c - 5 * k)
                      - 56 * x**4)
            + a**2 * (2 * x**4 * (47 * b**2 + b * (16 * k - 60 * c)
                                  - 7 * (2 * c**2 - 6 * c * k + k**2))
                      + 4 * b**2 * c**2 * (b - k) ** 2
                      + b * c * x * (b - k) * (9 * b**2 + 24 * b * c - 9 * b * k
                                               + 5 * c * k)
                      + x**3 * (72 * b**3 + 20 * b**2 * (c - 3 * k)
                                + b * (-33 * c**2 + 112 * c * k - 12 * k**2)
                                + c * k * (17 * c - 16 * k))
                      + 2 * x**2 * (6 * b**4 + 3 * b**3 * (9 * c - 4 * k)
                                    + 2 * b**2 * (c - k) * (4 * c - 3 * k)
                                    + 13 * b * c * k * (c - k) - c**2 * k**2)
                      - 2 * x**5 * (3 * b + 50 * c - 27 * k)
                      - 48 * x**6)
            + x**3 * (-b * c**3 * (b - k) * (b**2 - k * (b + c))
                      - 2 * x**5 * (69 * b**2 + 6 * b * (4 * c - 5 * k)
                                    - 10 * c**2 + 6 * c * k + k**2)
                      - 2 * b * c**2 * x * (b - k) * (3 * b**2 + 3 * b * (c - k)
                                                      + c * (c - 2 * k))
                      + x**4 * (-72 * b**3 + b**2 * (84 * k - 162 * c)
                                + 3 * b * (5 * c**2 + 12 * c * k - 4 * k**2)
                                + c * (4 * c**2 - 15 * c * k + 2 * k**2))
                      - b * c * x**2 * (15 * b**3 + 6 * b**2 * (6 * c - 5 * k)
                                        + b * (16 * c**2 - 41 * c * k + 15 * k**2)
                                        + c * k * (5 * k - 4 * c))
                      - 2 * x**3 * (k * (-12 * b**3 - 50 * b**2 * c + b * c**2 + c**3)
                                    + b * (6 * b**3 + 45 * b**2 * c + 32 * b * c**2
                                           - 3 * c**3)
                                    + k**2 * (6 * b - c) * (b + c))
                      + 3 * x**6 * (-27 * b + 4 * c + 3 * k)
                      - 12 * x**7)
            + a * x * (6 * b**2 * c**3 * (b - k) ** 2
                       + 2 * x**5 * (225 * b**2 + 276 * b * c - 156 * b * k
                                     + 12 * c**2 - 50 * c * k + 11 * k**2)
                       + x**4 * (216 * b**3 + b**2 * (679 * c - 272 * k)
                                 + b * (210 * c**2 - 394 * c * k + 56 * k**2)
                                 + c * k * (19 * k - 18 * c))
                       + 2 * x**3 * (18 * b**4 + 6 * b**3 * (29 * c - 6 * k)
                                     + 2 * b**2 * (79 * c**2 - 103 * c * k + 9 * k**2)
                                     + b * c * (c - 4 * k) * (15 * c - 8 * k)
                                     - c**2 * k * (c - 2 * k))
                       + c * x**2 * (58 * b**4 + 4 * b**3 * (45 * c - 29 * k)
                                     + b**2 * (57 * c**2 - 198 * c * k + 58 * k**2)
                                     + 18 * b * c * k * (k - c) + c**2 * k**2)
                       + 2 * b * c**2 * x * (b - k) * (3 * b * (5 * b + 6 * c)
                                                       - k * (15 * b + c))
                       + 8 * x**6 * (51 * b + 16 * c - 13 * k)
                       + 120 * x**7))


def eta11_1(a, b, c, k, x):
    """Degree 11."""
    return (a**3 * (b**3 * c * (k - b)
                    + x**3 * (-108 * b**2 - 53 * b * c + 54 * b * k + 5 * c * k)
                    + b * x**2 * (-43 * b**2 - 20 * b * c + 31 * b * k + 16 * c * k)
                    + b**2 * x * (-10 * b**2 + b * (c + 10 * k) + c * k)
                    + x**4 * (-139 * b - 24 * c + 23 * k)
                    - 58 * x**5)
            + x**5 * (b * c * x**2 * (-21 * b**2 + 5 * k * (b + c) - 10 * b * c
                                      - 4 * c**2)
                      - b * c**2 * x * (6 * b**2 + 5 * b * c + 2 * b * k + 2 * c**2
                                        - 7 * c * k)
                      - x**4 * (30 * b**2 + 3 * b * (7 * c - 2 * k) + c * (k - 11 * c))
                      + x**3 * (-12 * b**3 + b**2 * (4 * k - 45 * c)
                                + b * c * (5 * c + 9 * k) + c**2 * (2 * c - 3 * k))
                      + b * c**2 * (b**3 - b**2 * (2 * c + k) - b * c**2 + 2 * c**2 * k)
                      + x**5 * (-21 * b + 4 * c + k)
                      - 3 * x**6)
            + a**2 * x * (3 * b**3 * c**2 * (b - k)
                          + x**4 * (198 * b**2 - 39 * b * c - 36 * b * k - 15 * c**2
                                    + 17 * c * k)
                          + b**2 * c * x * (2 * b**2 + 29 * b * c - 2 * b * k
                                            - 13 * c * k)
                          + x**3 * (99 * b**3 + b**2 * (71 * c - 51 * k)
                                    + b * c * (29 * k - 16 * c) + 2 * c**2 * k)
                          + b * x**2 * (12 * b**3 + b**2 * (53 * c - 12 * k)
                                        + 17 * b * c * (2 * c - k) + 7 * c**2 * k)
                          + x**5 * (129 * b - 44 * c - 9 * k)
                          + 24 * x**6)
            + a * x**2 * (3 * b**3 * c**3 * (b - k)
                          + x**5 * (128 * b**2 + 273 * b * c - 34 * b * k + 20 * c**2
                                    - 29 * c * k)
                          + 2 * b**2 * c**2 * x * (5 * b**2 + 12 * b * c - 5 * b * k
                                                   - 6 * c * k)
                          + x**4 * (51 * b**3 + b**2 * (334 * c - 31 * k)
                                    + b * c * (103 * c - 74 * k)
                                    + c**2 * (2 * c - 7 * k))
                          + b * c * x**2 * (19 * b**3 + b**2 * (89 * c - 19 * k)
                                            + 5 * b * c * (8 * c - 9 * k)
                                            - 2 * c**2 * k)
                          + x**3 * (6 * b**4 + b**3 * (151 * c - 6 * k)
                                    + b**2 * c * (174 * c - 85 * k)
                                    + 2 * b * c**2 * (8 * c - 9 * k) - 2 * c**3 * k)
                          + x**6 * (123 * b + 80 * c - 15 * k)
                          + 42 * x**7)
            + a**4 * (b**3 - b**2 * (k + 4 * x) + 2 * b * x * (k - 6 * x) - 5 * x**3))


def eta11_2(a, b, c, k, x):
    """Degree 11."""
    return (a**4 * (b**3 - 3 * b * x**2 - x**3)
            + x**6 * (b - c) ** 2 * (-3 * b * c * x - b * c * (b + c) + x**3)
            + a**2 * x**2 * (-3 * b**3 * c * (b - 2 * c)
                             + 3 * b * x**2 * (9 * b**2 + 2 * b * c - c**2)
                             + b**2 * x * (4 * b**2 + b * c + 9 * c**2)
                             + x**4 * (31 * b - 2 * c)
                             + 3 * b * x**3 * (17 * b - 4 * c)
                             + 9 * x**5)
            - a**3 * (b**4 * c + 6 * b**4 * x + 3 * b**2 * x**2 * (7 * b + c)
                      + 3 * x**4 * (11 * b + c) + b * x**3 * (35 * b + 11 * c)
                      + 9 * x**5)
            + a * x**3 * (b**3 * c**2 * (3 * c - 2 * b)
                          + 3 * x**4 * (-3 * b**2 + 7 * b * c + c**2)
                          + 3 * b**2 * x**2 * (-2 * b**2 + 2 * b * c + 5 * c**2)
                          - 3 * b**2 * c * x * (b - 2 * c) * (b + c)
                          + x**3 * (-15 * b**3 + 33 * b**2 * c + b * c**2 + c**3)
                          - 3 * x**5 * (b - 3 * c)
                          + x**6))


# The closed form states eta11 with a leading minus over the three-term
# combination; the appendix restates it without.  The numeric Lyapunov oracle
# fixes the convention: the minus-sign version matches sign(l1) on every
# constructed Hopf point, so that is the one implemented.
def eta11(p: Params, x: float) -> float:
    a, b, c, k, r, s = p.a, p.b, p.c, p.k, p.r, p.s
    return -(r**2 * x**3 * eta11_0(a, b, c, k, x)
             + k * r * x * s * eta11_1(a, b, c, k, x)
             + k**2 * s**2 * eta11_2(a, b, c, k, x))


def eta1_prefactor(p: Params, x: float, omega: float) -> float:
    """Positive factor with eta1 = prefactor * eta11."""
    a, b, c, k, q, s = p.a, p.b, p.c, p.k, p.q, p.s
    return q**2 * s / (8 * omega**3 * k**2 * x * (b + x) ** 2
                       * (a + c * x + x * x) ** 4
                       * (-a + b * c + 2 * b * x + x * x) ** 2)


# ---------------------------------------------------------------------------
# Parameter constructions that place a prescribed degeneracy at x = xstar.


def params_saddle_node(p: Params, xstar: float) -> Params:
    """Adjust (m, q) so that F(x*) = F'(x*) = 0."""
    a, b, c, k, r, n, x = p.a, p.b, p.c, p.k, p.r, p.n, xstar
    den = k * (a * (b + 2 * x) + x * x * (c - b))
    m = r * (b + x) ** 2 * (a * k + x * x * (c - k + 2 * x)) / den
    q = r * (a + x * (c + x)) ** 2 * (-b + k - 2 * x) / (n * den)
    return p.with_(m=m, q=q)


def params_cusp2(p: Params, xstar: float) -> Params:
    """Adjust (r, m, n) so that F(x*) = F'(x*) = p(x*) = 0."""
    a, b, c, k, s, q, x = p.a, p.b, p.c, p.k, p.s, p.q, xstar
    den = x * (a + x * (c + x)) * (b - k + 2 * x)
    r = -k * s * (a * (b + 2 * x) + x * x * (c - b)) / den
    m = -s * (b + x) ** 2 * (a * k + x * x * (c - k + 2 * x)) / den
    n = s * (a + x * (c + x)) / (q * x)
    return p.with_(r=r, m=m, n=n)


def params_cusp3(p: Params, xstar: float) -> Params:
    """Adjust (r, m, n, k) so that F = F' = p = p' = 0 at x*."""
    a, b, c, s, q, x = p.a, p.b, p.c, p.s, p.q, xstar
    num = (a**2 * (b + x) * (b + 2 * x)
           + a * x * (3 * b**2 + 9 * b * x + 8 * x**2) * (c + 2 * x)
           - x**3 * (b**2 * (c + 3 * x) + 3 * b * x * (c + 3 * x)
                     + 2 * x * (-c**2 - 2 * c * x + x * x)))
    r = s * num / (2 * x * x * (a + x * (c + x)) ** 2)
    m = s * (b + x) ** 3 * bt3_N1(a, c, x) / (2 * x * x * (a + x * (c + x)) ** 2)
    n = s * (a + x * (c + x)) / (q * x)
    # the x*(c-x) factor (source prints x*(x-c)) is forced by re-deriving k
    # from the codim-2 construction plus p'(x*) = 0
    kden = (a**2 * (b - x) + a * x * (3 * b * (c + 2 * x) + x * (c + 6 * x))
            + x**3 * (x * (c - x) - b * (c + 3 * x)))
    k = num / kden
    return p.with_(r=r, m=m, n=n, k=k)


def params_hopf(p: Params, xstar: float) -> Params:
    """Adjust (m, n) so that F(x*) = 0 and trace = p(x*) = 0."""
    a, b, c, k, r, s, q, x = p.a, p.b, p.c, p.k, p.r, p.s, p.q, xstar
    den = -a + b * (c + 2 * x) + x * x
    m = -(b + x) ** 2 * (a * (k * s + r * x)
                         + x * (c * k * (s - r) + 2 * c * r * x
                                + k * x * (s - 2 * r) + 3 * r * x * x)) / (k * x * den)
    n = (a + x * (c + x)) ** 2 * (b * (k * s + r * x)
                                  + x * (k * (s - r) + 2 * r * x)) / (k * q * x * x * den)
    return p.with_(m=m, n=n)


# ---------------------------------------------------------------------------
# Degeneracy tests.


def _scalar_data(p: Params, x: float):
    F = equilibria.F_eval(p, x)
    Fp = equilibria.Fprime_eval(p, x)
    Fpp = equilibria.Fsecond_eval(p, x)
    tr = equilibria.p_eval(p, x)
    trp = equilibria.pprime_eval(p, x)
    return F, Fp, Fpp, tr, trp


def _rate_scale(p: Params) -> float:
    return max(p.r, p.s)


def saddle_node_cusp_test(p: Params, xstar: float, ztol: float = ZTOL) -> DegeneracyReport:
    """Classify the degeneracy at a double root of the quartic."""
    F, Fp, Fpp, tr, trp = _scalar_data(p, xstar)
    L = _length_scale(p, xstar)
    rate = _rate_scale(p)
    sF = rate * L
    if abs(F) > 1e-6 * sF:
        raise NotDegenerate(f"F(x*) = {F:.3e}; x* is not an equilibrium")
    fp_scale = equilibria._fprime_scale(p, xstar)
    if abs(Fp) > ztol * fp_scale:
        raise NotDegenerate(f"F'(x*) = {Fp:.3e} not zero at tolerance {ztol * fp_scale:.3e}")
    rep = DegeneracyReport(F=F, Fprime=Fp, Fsecond=Fpp, p=tr, pprime=trp,
                           verdict=Verdict.REGULAR)
    tr_scale = rate + abs(tr)
    trp_scale = rate / L + abs(trp)
    fpp_scale = fp_scale / L + abs(Fpp)
    if abs(tr) > ztol * tr_scale:
        rep.verdict = Verdict.SADDLE_NODE if abs(Fpp) > ztol * fpp_scale else Verdict.DEGENERATE_BEYOND
        return rep
    if abs(Fpp) <= ztol * fpp_scale:
        rep.verdict = Verdict.DEGENERATE_BEYOND
        return rep
    if abs(trp) > ztol * trp_scale:
        rep.verdict = Verdict.CUSP2
        return rep
    bm, bp = cusp3_b_pm(p.a, p.c, xstar)
    rep.b_minus, rep.b_plus = bm, bp
    Lb = _length_scale_nok(p, xstar)
    on_excluded = (not math.isnan(bm)) and (
        abs(p.b - bm) <= ztol * Lb or abs(p.b - bp) <= ztol * Lb)
    rep.verdict = Verdict.DEGENERATE_BEYOND if on_excluded else Verdict.CUSP3
    return rep


def bt2_nondegeneracy(p: Params, xstar: float, ztol: float = ZTOL) -> DegeneracyReport:
    """Evaluate the codim-2 double-zero nondegeneracy scalars u1, u2, u3."""
    rep = saddle_node_cusp_test(p, xstar, ztol)
    if rep.verdict not in (Verdict.CUSP2,):
        raise ConditionsNotMet(f"cusp of codimension 2 required, found {rep.verdict}")
    a, b, c, k, x = p.a, p.b, p.c, p.k, xstar
    L = _length_scale(p, x)
    rep.u1 = bt2_u1(a, b, c, k, x)
    rep.u2 = bt2_u2(a, b, c, k, x)
    rep.u3 = bt2_u3(a, b, c, k, x)
    ok = (abs(rep.u1) > ztol * L**5 and abs(rep.u2) > ztol * L**6
          and abs(rep.u3) > ztol * L**6
          and abs(k - bt2_k_excluded(a, b, c, x)) > ztol * L)
    rep.verdict = Verdict.BTDEG2_OK if ok else Verdict.DEGENERATE_BEYOND
    return rep


def bt3_nondegeneracy(p: Params, xstar: float, ztol: float = ZTOL) -> DegeneracyReport:
    """Evaluate the codim-3 double-zero nondegeneracy scalars N1, N2, N3."""
    rep = saddle_node_cusp_test(p, xstar, ztol)
    if rep.verdict not in (Verdict.CUSP3, Verdict.DEGENERATE_BEYOND):
        raise ConditionsNotMet(f"cusp of codimension 3 required, found {rep.verdict}")
    a, b, c, x = p.a, p.b, p.c, xstar
    L = _length_scale_nok(p, x)
    rep.N1 = bt3_N1(a, c, x)
    rep.N2 = bt3_N2(a, b, c, x)
    rep.N3 = bt3_N3(a, b, c, x)
    rep.b_star_minus, rep.b_star_plus = bt3_b_star_pm(a, c, x)
    off_b = math.isnan(rep.b_minus) or (
        abs(p.b - rep.b_minus) > ztol * L and abs(p.b - rep.b_plus) > ztol * L)
    off_bstar = math.isnan(rep.b_star_minus) or (
        abs(p.b - rep.b_star_minus) > ztol * L and abs(p.b - rep.b_star_plus) > ztol * L)
    nonzero = (abs(rep.N1) > ztol * L**4 and abs(rep.N2) > ztol * L**8
               and abs(rep.N3) > ztol * L**14)
    rep.verdict = Verdict.BTDEG3_OK if (off_b and off_bstar and nonzero) else Verdict.DEGENERATE_BEYOND
    return rep


def lyapunov1(p: Params, xstar: float, ztol: float = ZTOL) -> LyapunovReport:
    """First Lyapunov data at a Hopf point: closed form and numeric oracle."""
    F, Fp, _, tr, _ = _scalar_data(p, xstar)
    L = _length_scale(p, xstar)
    rate = _rate_scale(p)
    if abs(F) > 1e-6 * rate * L or abs(tr) > 1e-6 * rate:
        raise NotHopf(f"Hopf conditions fail: F={F:.3e}, trace={tr:.3e}")
    if Fp >= 0:
        raise NotHopf(f"F'(x*) = {Fp:.3e} >= 0 (determinant not positive)")
    omega, l1, _ = oracle.lyapunov_coefficients(p, xstar, order=3)
    e11 = eta11(p, xstar)
    a, b, c, k, r, s, x = p.a, p.b, p.c, p.k, p.r, p.s, xstar
    envelope = (abs(r**2 * x**3 * eta11_0(a, b, c, k, x))
                + abs(k * r * x * s * eta11_1(a, b, c, k, x))
                + abs(k**2 * s**2 * eta11_2(a, b, c, k, x)))
    sign = 0
    if abs(e11) > ztol * max(envelope, 1e-300):
        sign = 1 if e11 > 0 else -1
    return LyapunovReport(eta11=e11, eta1_sign=sign, l1_numeric=l1, omega=omega)


def lyapunov2_numeric(p: Params, xstar: float, l1_tol: float = 1e-6) -> float:
    """Numeric second Lyapunov coefficient; requires |l1| below tolerance."""
    rep = lyapunov1(p, xstar)
    if abs(rep.l1_numeric) > l1_tol * max(1.0, 1.0 / rep.omega):
        raise NotDegenerateHopf(
            f"l1 = {rep.l1_numeric:.3e} not small; second coefficient undefined")
    _, _, l2 = oracle.lyapunov_coefficients(p, xstar, order=5)
    return l2


# ---------------------------------------------------------------------------
# Generic coefficient-combination chains (numeric, fed by exact Taylor data).


def bt_quadratic_coeffs(p: Params, xstar: float) -> tuple[float, float]:
    """(e20, e11) of the double-zero normal form ydot = e20 x^2 + e11 x y + ...

    Valid at points with zero trace (the chain divides by a01 and a10).
    e20 is a positive multiple of F''(x*) and e11 of -p'(x*).
    """
    co = model.taylor_coefficients((xstar, p.n * xstar), p, 2)
    a10, b10 = co[(1, 0)]
    a01, b01 = co[(0, 1)]
    a20, b20 = co[(2, 0)]
    a11, b11 = co[(1, 1)]
    b02 = co[(0, 2)][1]
    c20 = (a11 * b10 + a10 * a20) / (a01 * a10)
    d20 = (a10**2 * b20 + a10 * b10 * (b11 - a20) + b10**2 * (b02 - a11)) / (a01 * a10**2)
    d11 = (a10 * b11 - b10 * (a11 - 2 * b02)) / (a01 * a10)
    return d20, d11 + 2 * c20


def saddle_node_cm_quadratic(p: Params, xstar: float) -> float:
    """Center-manifold quadratic coefficient via the hatted combination chain.

    Reproduces the reduced flow xdot = c20_hat x^2 + ... of the saddle-node
    proof; proportional to F''(x*) with the printed prefactor.
    """
    co = model.taylor_coefficients((xstar, p.n * xstar), p, 2)
    a10, b10 = co[(1, 0)]
    a01, b01 = co[(0, 1)]
    a20, b20 = co[(2, 0)]
    a11, b11 = co[(1, 1)]
    b02 = co[(0, 2)][1]
    return (a10 * (a01 * b11 - a11 * b01) - a10**2 * b02
            + a01 * (a20 * b01 - a01 * b20)) / (a01 * (a10 + b01))


def bt2_unfolding_map(p: Params, xstar: float, delta1: float, delta2: float) -> tuple[float, float]:
    """(phi1, phi2) of the codim-2 unfolding in (m + delta1, n + delta2).

    Taylor data of the perturbed field is taken around the unperturbed
    equilibrium, so constant terms appear for delta != 0; the combination
    chain then reduces to the universal double-zero unfolding constants.
    """
    pd = p.with_(m=p.m + delta1, n=p.n + delta2)
    y0 = p.n * xstar
    f0 = model.rhs((xstar, y0), pd)
    co = model.taylor_coefficients((xstar, y0), pd, 2)
    a00, b00 = f0[0], f0[1]
    a10, b10 = co[(1, 0)]
    a01, b01 = co[(0, 1)]
    a20, b20 = co[(2, 0)]
    a11, b11 = co[(1, 1)]
    b02 = co[(0, 2)][1]
    c00 = a00**2 * b02 / a01 - a00 * b01 + a01 * b00
    c10 = (a10 * (2 * a00 * b02 / a01 - b01) + a11 * (b00 - a00**2 * b02 / a01**2)
           + a01 * b10 - a00 * b11)
    c01 = -a00 * (a11 + 2 * b02) / a01 + a10 + b01
    c20 = (-a20 * b01 + a11 * b10 - a10 * b11 + a01 * b20
           + a00**2 * a11**2 * b02 / a01**3 - 2 * a00 * a10 * a11 * b02 / a01**2
           + (a10**2 + 2 * a00 * a20) * b02 / a01)
    c11 = (-(a01 * a10 - a00 * a11) * (a11 + 2 * b02) / a01**2 + 2 * a20 + b11)
    c02 = (a11 + b02) / a01
    d00 = c00
    d10 = c10 - 2 * c00 * c02
    d01 = c01
    d20 = c00 * c02**2 - 2 * c10 * c02 + c20
    d11 = c11 - c01 * c02
    e00 = d00 - d10**2 / (4 * d20)
    e01 = d01 - d10 * d11 / (2 * d20)
    e20 = d20
    e11 = d11
    return e00 * e11**4 / e20**3, e01 * e11 / e20
