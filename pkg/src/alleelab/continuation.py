"""Pseudo-arclength continuation of equilibrium branches in one parameter.

The corrector works in scaled coordinates z = (x/k, y/(n k), theta/s_theta)
so that arclength steps are comparable across parameter windows.  Residuals
use the raw field away from the prey axis and the polynomial rescaled field
within x < 1e-3 k, where the transcritical exchange with the axis state is
visible.  Test functions: det(J) for folds, trace(J) gated by det > 0 for
Hopf points, and x itself for the transcritical crossing.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import equilibria, model, normal_forms, oracle
from .errors import NewtonDivergence, SingularJacobianAtStart
from .model import Params

RESCALED_X_FRACTION = 1e-3


class SpecialKind(enum.Enum):
    FOLD = "Fold"
    HOPF = "Hopf"
    TRANSCRITICAL = "Transcritical"
    SNL = "SNL"
    BT = "BT"
    GH = "GH"
    CUSP_EQ = "CuspEq"
    CPL = "CPL"
    HOM_APPROX = "HomApprox"


class Topology(enum.Enum):
    OPEN_ARC = "OpenArc"
    CLOSED_LOOP = "ClosedLoop"


@dataclass(frozen=True)
class BranchPoint:
    param: float
    x: float
    y: float
    det: float
    tr: float
    eigs: tuple
    stable: bool

    @property
    def test_fold(self) -> float:
        return self.det

    @property
    def test_hopf(self) -> float:
        return self.tr

    @property
    def test_tc(self) -> float:
        return self.x


@dataclass(frozen=True)
class SpecialPoint:
    kind: SpecialKind
    param: float
    x: float
    y: float
    diagnostics: dict = field(default_factory=dict)


@dataclass
class Branch:
    which_param: str
    points: list
    specials: list
    topology: Topology
    provenance: dict

    def params(self) -> np.ndarray:
        return np.array([pt.param for pt in self.points])

    def states(self) -> np.ndarray:
        return np.array([[pt.x, pt.y] for pt in self.points])


@dataclass
class ContinuationOptions:
    ds0: float = 2e-3
    ds_max: float = 1e-2
    ds_min: float = 1e-7
    newton_tol: float = 1e-11
    max_newton: int = 8
    max_steps: int = 4000
    grow: float = 1.3
    shrink: float = 0.5
    closure_tol: float = 1e-6
    refine_iters: int = 60


class _EqSystem:
    """Scaled equilibrium residual with field switching near the axis."""

    def __init__(self, p: Params, which_param: str):
        self.base = p
        self.which = which_param
        self.sx = p.k
        self.sy = p.n * p.k
        self.x_switch = RESCALED_X_FRACTION * p.k
        self.fscale_raw = np.array([max(p.r, p.s) * p.k, p.s * p.n * p.k])

    def params_at(self, theta: float) -> Params:
        return self.base.with_(**{self.which: theta})

    def _use_rescaled(self, x: float) -> bool:
        return x < self.x_switch

    def _fscale_res(self, x, p):
        # local rescaling factor keeps the residual contract uniform in
        # raw-field units down to the axis
        xa = max(abs(x), 1e-6 * p.k)
        fac = p.k * p.n * xa * (xa + p.b) * (xa * xa + p.c * xa + p.a)
        return self.fscale_raw * fac

    def residual(self, x, y, theta):
        p = self.params_at(theta)
        if self._use_rescaled(x):
            f = np.array(model.rhs_rescaled_vec(x, y, p))
            return f / self._fscale_res(x, p)
        f = np.array(model.rhs_vec(x, y, p))
        return f / self.fscale_raw

    def jac_rows(self, x, y, theta):
        """Rows d(residual)/d(x/sx, y/sy, theta/stheta=theta) unscaled in theta."""
        p = self.params_at(theta)
        if self._use_rescaled(x):
            J = np.array(model.jacobian_rescaled_vec(x, y, p))
            dth = np.array(model.rhs_rescaled_param_deriv(x, y, p, self.which))
            fs = self._fscale_res(x, p)
        else:
            J = np.array(model.jacobian_vec(x, y, p))
            dth = np.array(model.rhs_param_deriv(x, y, p, self.which))
            fs = self.fscale_raw
        A = np.empty((2, 3))
        A[:, 0] = J[:, 0] * self.sx / fs
        A[:, 1] = J[:, 1] * self.sy / fs
        A[:, 2] = dth / fs
        return A

    def eig_data(self, x, y, theta):
        """Raw-field eigen data (finite for x > 0); used for test functions."""
        p = self.params_at(theta)
        xe = max(x, 1e-12 * p.k)
        (j11, j12), (j21, j22) = model.jacobian_vec(xe, y, p)
        tr = j11 + j22
        det = j11 * j22 - j12 * j21
        disc = tr * tr - 4.0 * det
        if disc >= 0:
            s = math.sqrt(disc)
            eigs = ((tr - s) / 2, (tr + s) / 2)
        else:
            s = math.sqrt(-disc)
            eigs = (complex(tr / 2, -s / 2), complex(tr / 2, s / 2))
        stable = max(e.real if isinstance(e, complex) else e for e in eigs) < 0
        return det, tr, eigs, stable


def test_functions(point: BranchPoint):
    """(test_fold, test_hopf, test_tc) of a branch point."""
    return point.test_fold, point.test_hopf, point.test_tc


def _scaled(sys, x, y, theta, stheta):
    return np.array([x / sys.sx, y / sys.sy, theta / stheta])


def _unscaled(sys, z, stheta):
    return z[0] * sys.sx, z[1] * sys.sy, z[2] * stheta


def _correct(sys, z_pred, direction, stheta, opts, fixed_theta=None):
    """Newton on {residual = 0, direction . (z - z_pred) = 0} in scaled z."""
    z = z_pred.copy()
    for it in range(opts.max_newton):
        x, y, theta = _unscaled(sys, z, stheta)
        if fixed_theta is not None:
            theta = fixed_theta
            z[2] = theta / stheta
        r = sys.residual(x, y, theta)
        g = float(direction @ (z - z_pred)) if fixed_theta is None else 0.0
        if max(abs(r[0]), abs(r[1]), abs(g)) < opts.newton_tol:
            return z, it
        A = sys.jac_rows(x, y, theta)
        A = A.copy()
        A[:, 2] *= stheta
        if fixed_theta is not None:
            M = A[:, :2]
            try:
                dz = np.linalg.solve(M, -r)
            except np.linalg.LinAlgError:
                return None, it
            z = z + np.array([dz[0], dz[1], 0.0])
        else:
            M = np.vstack([A, direction])
            rhs = np.array([-r[0], -r[1], -g])
            try:
                dz = np.linalg.solve(M, rhs)
            except np.linalg.LinAlgError:
                return None, it
            z = z + dz
        if not np.all(np.isfinite(z)):
            return None, it
    return None, opts.max_newton


def _tangent(sys, z, stheta, prev=None):
    x, y, theta = _unscaled(sys, z, stheta)
    A = sys.jac_rows(x, y, theta)
    A = A.copy()
    A[:, 2] *= stheta
    _, _, vh = np.linalg.svd(A)
    t = vh[-1]
    if prev is not None and float(prev @ t) < 0:
        t = -t
    return t


def _make_point(sys, z, stheta) -> BranchPoint:
    x, y, theta = _unscaled(sys, z, stheta)
    det, tr, eigs, stable = sys.eig_data(x, y, theta)
    return BranchPoint(param=theta, x=x, y=y, det=det, tr=tr, eigs=eigs, stable=stable)


def _bisect_scalar(fn, lo, hi, iters=200):
    flo = fn(lo)
    if flo == 0.0:
        return lo
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-15 * (1.0 + abs(mid)):
            break
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _refine_between(sys, zA, zB, stheta, opts, value_of):
    """Bisection for a sign change of ``value_of`` on the chord [zA, zB]."""
    d = zB - zA
    nrm = np.linalg.norm(d)
    if nrm == 0:
        return zA
    d = d / nrm
    fA = value_of(_make_point(sys, zA, stheta))
    lo, hi = 0.0, 1.0
    zmid = zA
    for _ in range(opts.refine_iters):
        f = 0.5 * (lo + hi)
        z_pred = zA + f * (zB - zA)
        z, _ = _correct(sys, z_pred, d, stheta, opts)
        if z is None:
            # corrector trouble mid-chord: shrink towards the known-good side
            hi = f
            continue
        zmid = z
        val = value_of(_make_point(sys, z, stheta))
        if val == 0.0 or (hi - lo) < 1e-14:
            break
        if (val > 0) == (fA > 0):
            lo = f
        else:
            hi = f
    return zmid


def continue_equilibrium(p0: Params, e0, which_param: str, prange, opts: ContinuationOptions | None = None,
                         compute_l1: bool = True) -> Branch:
    """Trace the equilibrium branch through (e0, p0) across ``prange``.

    Runs both directions from the start, concatenates, detects and refines
    Fold/Hopf/Transcritical points, and classifies the branch topology.
    """
    opts = opts or ContinuationOptions()
    theta0 = p0.get(which_param)
    lo, hi = float(min(prange)), float(max(prange))
    if not (lo <= theta0 <= hi):
        raise ValueError(f"start {which_param}={theta0} outside range {prange}")
    stheta = hi - lo
    sys = _EqSystem(p0, which_param)
    x0, y0 = (e0.x, e0.y) if hasattr(e0, "x") else (float(e0[0]), float(e0[1]))
    z0 = _scaled(sys, x0, y0, theta0, stheta)
    z0c, _ = _correct(sys, z0, np.zeros(3), stheta, opts, fixed_theta=theta0)
    if z0c is None:
        raise SingularJacobianAtStart(
            f"could not converge the starting equilibrium at {which_param}={theta0}")
    halves = []
    closed = False
    for sgn in (+1.0, -1.0):
        zs, terminated_closed = _trace_direction(sys, z0c, sgn, stheta, (lo, hi), opts)
        halves.append(zs)
        closed = closed or terminated_closed
        if terminated_closed:
            break
    if closed or len(halves) == 1:
        zs_all = halves[0]
    else:
        zs_all = list(reversed(halves[1][1:])) + halves[0]
    points = [_make_point(sys, z, stheta) for z in zs_all]
    specials = _detect_specials(sys, zs_all, stheta, opts, compute_l1)
    topo = Topology.CLOSED_LOOP if closed else Topology.OPEN_ARC
    return Branch(which_param=which_param, points=points, specials=specials,
                  topology=topo,
                  provenance={"start": (x0, y0, theta0), "range": (lo, hi)})


def _trace_direction(sys, z0, sgn, stheta, bounds, opts):
    lo, hi = bounds
    t = _tangent(sys, z0, stheta) * sgn
    zs = [z0]
    ds = opts.ds0
    z = z0
    failures = 0
    for _ in range(opts.max_steps):
        z_pred = z + ds * t
        znew, iters = _correct(sys, z_pred, t, stheta, opts)
        if znew is None or np.linalg.norm(znew - z) > 5 * max(ds, 1e-14):
            ds *= opts.shrink
            failures += 1
            if ds < opts.ds_min:
                break
            continue
        failures = 0
        tnew = _tangent(sys, znew, stheta, prev=t)
        theta = znew[2] * stheta
        x = znew[0] * sys.sx
        if theta > hi or theta < lo:
            target = hi if theta > hi else lo
            zb, _ = _correct(sys, znew, tnew, stheta, opts, fixed_theta=target)
            if zb is not None:
                zs.append(zb)
            break
        if x < -1e-9 * sys.sx:
            zs.append(znew)  # crossed the axis; TC refinement handles the rest
            break
        zs.append(znew)
        # closed-loop detection against the start
        if len(zs) > 20:
            dist = np.linalg.norm(znew - zs[0])
            if dist < opts.closure_tol * max(1.0, np.linalg.norm(zs[0])):
                t0 = _tangent(sys, zs[0], stheta)
                if abs(float(tnew @ t0)) > 0.99:
                    return zs, True
        z, t = znew, tnew
        if iters <= 3:
            ds = min(ds * opts.grow, opts.ds_max)
    return zs, False


def _detect_specials(sys, zs, stheta, opts, compute_l1):
    specials = []
    pts = [_make_point(sys, z, stheta) for z in zs]
    for i in range(len(zs) - 1):
        a, b = pts[i], pts[i + 1]
        # fold: det sign change (det also vanishes at the transcritical
        # exchange on the axis; those are reported as TC only)
        if a.det * b.det < 0:
            zr = _refine_between(sys, zs[i], zs[i + 1], stheta, opts, lambda q: q.det)
            pr = _make_point(sys, zr, stheta)
            if pr.x > 1e-6 * sys.sx:
                specials.append(SpecialPoint(SpecialKind.FOLD, pr.param, pr.x, pr.y,
                                             {"det": pr.det, "tr": pr.tr}))
        # Hopf: trace sign change with positive determinant
        if a.tr * b.tr < 0:
            zr = _refine_between(sys, zs[i], zs[i + 1], stheta, opts, lambda q: q.tr)
            pr = _make_point(sys, zr, stheta)
            if pr.det > 0 and pr.x > 1e-6 * sys.sx:
                diag = {"det": pr.det, "omega": math.sqrt(pr.det)}
                if compute_l1:
                    p_at = sys.params_at(pr.param)
                    try:
                        _, l1, _ = oracle.lyapunov_coefficients(p_at, pr.x, order=3)
                        diag["l1"] = l1
                    except Exception:
                        diag["l1"] = math.nan
                specials.append(SpecialPoint(SpecialKind.HOPF, pr.param, pr.x, pr.y, diag))
        # transcritical: x sign change.  The positive branch meets the origin
        # exactly where the quartic's constant coefficient vanishes, and that
        # scalar condition stays well-conditioned where the planar corrector
        # degenerates (the rescaled Jacobian is the zero matrix at the origin)
        if a.x * b.x < 0:
            a0_of = lambda th: equilibria.quartic_coeffs(sys.params_at(th)).a0
            lo, hi = min(a.param, b.param), max(a.param, b.param)
            width = max(hi - lo, 1e-6 * stheta)
            for _ in range(20):
                if a0_of(lo) * a0_of(hi) <= 0:
                    break
                lo, hi = lo - width, hi + width
                width *= 2
            theta_tc = _bisect_scalar(a0_of, lo, hi)
            specials.append(SpecialPoint(SpecialKind.TRANSCRITICAL, theta_tc, 0.0, 0.0,
                                         {"x": 0.0}))
    return specials


def switch_to_cycle(branch: Branch, hopf: SpecialPoint, p_base: Params, eps: float = 1e-3):
    """Seed a small cycle at a Hopf point from the linearization.

    Returns the converged Cycle from the collocation corrector.  Routed
    through :mod:`alleelab.cycles`; degenerate Hopf points (l1 ~ 0) raise.
    """
    from . import cycles
    from .errors import DegenerateHopf

    l1 = hopf.diagnostics.get("l1", math.nan)
    if not math.isfinite(l1) or abs(l1) <= 1e-10:
        raise DegenerateHopf(f"|l1| = {l1}; use the degenerate-Hopf route")
    p_at = p_base.with_(**{branch.which_param: hopf.param})
    return cycles.seed_cycle_at_hopf(p_at, hopf.x, branch.which_param, eps=eps)
