"""Two-parameter continuation of codimension-1 curves and codim-2 points.

Fold curves follow {equilibrium, det J = 0}, Hopf curves {equilibrium,
trace J = 0} (det > 0 marks the genuine Hopf part; the continuation runs
through BT points onto the neutral-saddle part, which is kept but labeled).
Codim-2 events: BT (det = 0 on a trace curve / trace = 0 on a fold curve),
GH (first Lyapunov coefficient changes sign along the Hopf curve), CuspEq
(the quartic's double root becomes triple along the fold curve).  SNL curves
continue a full cycle BVP plus the planar fold condition integral div = 0;
their parameter-fold and cusp (CPL) points come from tangent sign changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import cycles as cy
from . import equilibria, model, oracle
from .continuation import SpecialKind, SpecialPoint
from .errors import DomainError, MissingCodim2Data, StartNotOnCurve
from .model import Params


@dataclass
class CurveTwoPar:
    kind: str                      # FoldCurve | HopfCurve | SNLCurve | HomApproxCurve | AlleeBoundary
    p1: str
    p2: str
    samples: list                  # dicts: {p1, p2, x, y, aux...}
    codim2: list                   # SpecialPoint in (p1, p2)
    provenance: dict = field(default_factory=dict)

    def array(self, key):
        return np.array([s[key] for s in self.samples])


@dataclass
class TwoParOptions:
    ds0: float = 2e-3
    ds_max: float = 2e-2
    ds_min: float = 1e-9
    newton_tol: float = 1e-11
    max_newton: int = 10
    max_steps: int = 3000
    grow: float = 1.3
    shrink: float = 0.5
    refine_iters: int = 60


class _EqCurveSystem:
    """{f = 0, g = 0} with g = det or trace of the raw-field Jacobian."""

    def __init__(self, p: Params, p1: str, p2: str, which: str):
        self.base = p
        self.p1, self.p2 = p1, p2
        self.which = which            # "fold" -> det, "hopf" -> trace
        self.sx, self.sy = p.k, p.n * p.k
        self.s1 = max(abs(p.get(p1)), 1e-2)
        self.s2 = max(abs(p.get(p2)), 1e-2)
        self.fscale = np.array([max(p.r, p.s) * p.k, p.s * p.n * p.k])
        self.gscale = (max(p.r, p.s) ** 2 if which == "fold" else max(p.r, p.s))

    def params_at(self, t1, t2):
        return self.base.with_(**{self.p1: t1, self.p2: t2})

    def unscale(self, z):
        return z[0] * self.sx, z[1] * self.sy, z[2] * self.s1, z[3] * self.s2

    def pack(self, x, y, t1, t2):
        return np.array([x / self.sx, y / self.sy, t1 / self.s1, t2 / self.s2])

    def _g(self, x, y, p):
        (j11, j12), (j21, j22) = model.jacobian_vec(x, y, p)
        if self.which == "fold":
            return j11 * j22 - j12 * j21
        return j11 + j22

    def residual(self, z):
        x, y, t1, t2 = self.unscale(z)
        try:
            p = self.params_at(t1, t2)
        except DomainError:
            return np.full(3, np.nan)
        f = np.array(model.rhs_vec(max(x, 1e-12 * self.sx), y, p))
        g = self._g(max(x, 1e-12 * self.sx), y, p)
        return np.array([f[0] / self.fscale[0], f[1] / self.fscale[1], g / self.gscale])

    def jacobian_fd(self, z):
        J = np.empty((3, 4))
        h = 1e-7
        for j in range(4):
            zp, zm = z.copy(), z.copy()
            zp[j] += h
            zm[j] -= h
            J[:, j] = (self.residual(zp) - self.residual(zm)) / (2 * h)
        return J

    def diagnostics(self, z):
        x, y, t1, t2 = self.unscale(z)
        p = self.params_at(t1, t2)
        (j11, j12), (j21, j22) = model.jacobian_vec(x, y, p)
        det = j11 * j22 - j12 * j21
        tr = j11 + j22
        return {"x": x, "y": y, self.p1: t1, self.p2: t2, "det": det, "tr": tr}


def _newton_curve(sys_, z_pred, direction, opts, extra_row=None, extra_val=0.0):
    z = z_pred.copy()
    for it in range(opts.max_newton):
        r = sys_.residual(z)
        if not np.all(np.isfinite(r)):
            return None, it
        g = float(direction @ (z - z_pred)) if extra_row is None else (
            float(extra_row @ z) - extra_val)
        rr = np.concatenate([r, [g]])
        if np.abs(rr).max() < opts.newton_tol:
            return z, it
        J = sys_.jacobian_fd(z)
        if not np.all(np.isfinite(J)):
            return None, it
        M = np.vstack([J, direction if extra_row is None else extra_row])
        try:
            dz = np.linalg.solve(M, -rr)
        except np.linalg.LinAlgError:
            return None, it
        if np.linalg.norm(dz) > 1.0:
            dz *= 1.0 / np.linalg.norm(dz)
        z = z + dz
        if not np.all(np.isfinite(z)):
            return None, it
    return None, opts.max_newton


def _tangent_curve(sys_, z, prev, opts):
    J = sys_.jacobian_fd(z)
    if not np.all(np.isfinite(J)):
        return prev
    M = np.vstack([J, prev])
    rhs = np.zeros(4)
    rhs[-1] = 1.0
    try:
        t = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        return prev
    n = np.linalg.norm(t)
    if n == 0 or not np.all(np.isfinite(t)):
        return prev
    t = t / n
    return t if float(prev @ t) >= 0 else -t


def _trace_eq_curve(sys_, z0, ranges, opts, monitors, sgn):
    """Generic curve tracer; monitors = {name: fn(sys_, z) -> float}."""
    (lo1, hi1), (lo2, hi2) = ranges
    t = np.zeros(4)
    t[2 + (0 if sgn in (1, -1) else 0)] = 1.0
    seed = np.zeros(4)
    seed[2] = float(np.sign(sgn))
    t = _tangent_curve(sys_, z0, seed, opts)
    if not np.any(t):
        raise StartNotOnCurve("no tangent at curve start")
    zs = [z0]
    vals = {name: [fn(sys_, z0)] for name, fn in monitors.items()}
    ds = opts.ds0
    z = z0
    for _ in range(opts.max_steps):
        znew, iters = _newton_curve(sys_, z + ds * t, t, opts)
        if znew is None or np.linalg.norm(znew - z) > 6 * max(ds, 1e-12):
            ds *= opts.shrink
            if ds < opts.ds_min:
                break
            continue
        x, y, t1, t2 = sys_.unscale(znew)
        if not (lo1 <= t1 <= hi1 and lo2 <= t2 <= hi2) or x < -1e-6 * sys_.sx or x > 10 * sys_.sx:
            zs.append(znew)
            for name, fn in monitors.items():
                vals[name].append(fn(sys_, znew))
            break
        zs.append(znew)
        for name, fn in monitors.items():
            vals[name].append(fn(sys_, znew))
        t = _tangent_curve(sys_, znew, t, opts)
        z = znew
        if iters <= 3:
            ds = min(ds * opts.grow, opts.ds_max)
        if len(zs) > 30:
            d0 = np.linalg.norm(znew - zs[0])
            if d0 < 1e-6 * max(1.0, np.linalg.norm(zs[0])):
                break
    return zs, vals


def _refine_on_curve(sys_, zA, zB, opts, value_fn):
    d = zB - zA
    nrm = np.linalg.norm(d)
    if nrm == 0:
        return zA
    d = d / nrm
    fA = value_fn(sys_, zA)
    lo, hi = 0.0, 1.0
    zbest = zA
    for _ in range(opts.refine_iters):
        f = 0.5 * (lo + hi)
        z, _ = _newton_curve(sys_, zA + f * (zB - zA), d, opts)
        if z is None:
            hi = f
            continue
        zbest = z
        val = value_fn(sys_, z)
        if val == 0.0 or hi - lo < 1e-15:
            break
        if (val > 0) == (fA > 0):
            lo = f
        else:
            hi = f
    return zbest


def _l1_monitor(sys_, z):
    x, y, t1, t2 = sys_.unscale(z)
    p = sys_.params_at(t1, t2)
    d = sys_.diagnostics(z)
    if d["det"] <= 1e-12 * sys_.gscale**(2 if sys_.which == "hopf" else 1):
        return math.nan
    try:
        _, l1, _ = oracle.lyapunov_coefficients(p, x, order=3)
        return l1
    except Exception:
        return math.nan


def _trace_monitor(sys_, z):
    return sys_.diagnostics(z)["tr"]


def _det_monitor(sys_, z):
    return sys_.diagnostics(z)["det"]


def _quartic_second_monitor(sys_, z):
    x, _, t1, t2 = sys_.unscale(z)
    p = sys_.params_at(t1, t2)
    return equilibria.quartic_coeffs(p).eval_second(x)


def _start_point(sys_, p: Params, x0: float, y0: float, opts) -> np.ndarray:
    z_init = sys_.pack(x0, y0, p.get(sys_.p1), p.get(sys_.p2))
    z0 = z_init.copy()
    # converge onto the curve with both parameters free via least squares
    for _ in range(opts.max_newton + 10):
        r = sys_.residual(z0)
        if not np.all(np.isfinite(r)):
            break
        if np.abs(r).max() < opts.newton_tol:
            if np.linalg.norm(z0 - z_init) > 0.5 * (1.0 + np.linalg.norm(z_init)):
                raise StartNotOnCurve(
                    "start converged only to a distant curve point; the seed "
                    "does not satisfy the defining system")
            return z0
        J = sys_.jacobian_fd(z0)
        if not np.all(np.isfinite(J)):
            break
        dz, *_ = np.linalg.lstsq(J, -r, rcond=None)
        z0 = z0 + dz
        if not np.all(np.isfinite(z0)):
            break
    raise StartNotOnCurve("start corrector failed to reach the defining system")


def continue_fold_curve(p: Params, start_xy, p1: str, p2: str, ranges,
                        opts: TwoParOptions | None = None) -> CurveTwoPar:
    """Fold (saddle-node) curve with BT and CuspEq points refined."""
    opts = opts or TwoParOptions()
    sys_ = _EqCurveSystem(p, p1, p2, "fold")
    z0 = _start_point(sys_, p, start_xy[0], start_xy[1], opts)
    monitors = {"tr": _trace_monitor, "fbar2": _quartic_second_monitor}
    return _assemble_eq_curve(sys_, z0, ranges, opts, monitors, "FoldCurve")


def continue_hopf_curve(p: Params, start_xy, p1: str, p2: str, ranges,
                        opts: TwoParOptions | None = None) -> CurveTwoPar:
    """Trace-zero curve with BT (det = 0) and GH (l1 = 0, det > 0) refined."""
    opts = opts or TwoParOptions()
    sys_ = _EqCurveSystem(p, p1, p2, "hopf")
    z0 = _start_point(sys_, p, start_xy[0], start_xy[1], opts)
    monitors = {"det": _det_monitor, "l1": _l1_monitor}
    return _assemble_eq_curve(sys_, z0, ranges, opts, monitors, "HopfCurve")


def _assemble_eq_curve(sys_, z0, ranges, opts, monitors, kind) -> CurveTwoPar:
    halves = []
    for sgn in (+1, -1):
        zs, vals = _trace_eq_curve(sys_, z0, ranges, opts, monitors, sgn)
        halves.append((zs, vals))
    zs = list(reversed(halves[1][0][1:])) + halves[0][0]
    vals = {}
    for name in monitors:
        vals[name] = list(reversed(halves[1][1][name][1:])) + halves[0][1][name]
    samples = []
    for z in zs:
        d = sys_.diagnostics(z)
        samples.append(d)
    codim2 = _find_codim2(sys_, zs, vals, opts, kind)
    return CurveTwoPar(kind=kind, p1=sys_.p1, p2=sys_.p2, samples=samples,
                       codim2=codim2, provenance={"ranges": ranges})


def _find_codim2(sys_, zs, vals, opts, kind):
    out = []
    for i in range(len(zs) - 1):
        if kind == "FoldCurve":
            a, b = vals["tr"][i], vals["tr"][i + 1]
            if np.isfinite(a) and np.isfinite(b) and a * b < 0:
                zr = _refine_on_curve(sys_, zs[i], zs[i + 1], opts, _trace_monitor)
                d = sys_.diagnostics(zr)
                p_at = sys_.params_at(d[sys_.p1], d[sys_.p2])
                diag = dict(d)
                try:
                    from . import normal_forms
                    rep = normal_forms.bt2_nondegeneracy(p_at, d["x"])
                    diag["bt2_verdict"] = rep.verdict.value
                    diag["u1u2u3"] = rep.u1 * rep.u2 * rep.u3
                except Exception as ex:
                    diag["bt2_verdict"] = f"unchecked ({type(ex).__name__})"
                out.append(SpecialPoint(SpecialKind.BT, d[sys_.p1], d["x"], d["y"], diag))
            a, b = vals["fbar2"][i], vals["fbar2"][i + 1]
            if np.isfinite(a) and np.isfinite(b) and a * b < 0:
                zr = _refine_on_curve(sys_, zs[i], zs[i + 1], opts, _quartic_second_monitor)
                d = sys_.diagnostics(zr)
                out.append(SpecialPoint(SpecialKind.CUSP_EQ, d[sys_.p1], d["x"], d["y"], dict(d)))
        else:
            a, b = vals["det"][i], vals["det"][i + 1]
            if np.isfinite(a) and np.isfinite(b) and a * b < 0:
                zr = _refine_on_curve(sys_, zs[i], zs[i + 1], opts, _det_monitor)
                d = sys_.diagnostics(zr)
                out.append(SpecialPoint(SpecialKind.BT, d[sys_.p1], d["x"], d["y"], dict(d)))
            a, b = vals["l1"][i], vals["l1"][i + 1]
            if np.isfinite(a) and np.isfinite(b) and a * b < 0 and \
                    vals["det"][i] > 0 and vals["det"][i + 1] > 0:
                zr = _refine_on_curve(sys_, zs[i], zs[i + 1], opts, _l1_monitor)
                d = sys_.diagnostics(zr)
                d2 = dict(d)
                d2["l1"] = _l1_monitor(sys_, zr)
                out.append(SpecialPoint(SpecialKind.GH, d[sys_.p1], d["x"], d["y"], d2))
    return out


# -- SNL curve in two parameters ---------------------------------------------

@dataclass
class SNLCurveOptions:
    ntst: int = 50
    ncol: int = 4
    newton_tol: float = 1e-9
    max_newton: int = 12
    ds0: float = 5e-3
    ds_max: float = 5e-2
    ds_min: float = 1e-10
    grow: float = 1.35
    shrink: float = 0.4
    max_steps: int = 1200
    amp_floor: float = 5e-4


class _SNLSystem:
    """Cycle BVP + integral-div row, two free parameters."""

    def __init__(self, base: Params, p1: str, p2: str, taus, ntst, ncol):
        self.base = base
        self.p1, self.p2 = p1, p2
        self.s1 = max(abs(base.get(p1)), 1e-2)
        self.s2 = max(abs(base.get(p2)), 1e-2)
        self.bvp = cy._BVP(base, p1, taus, ntst, ncol)

    def rebuild(self, taus):
        self.bvp = cy._BVP(self.base, self.p1, taus, self.bvp.ntst, self.bvp.ncol)

    def params_at(self, t1, t2):
        return self.base.with_(**{self.p1: t1, self.p2: t2})

    def pack(self, U, T, t1, t2):
        z = np.empty(2 * self.bvp.nf + 3)
        z[: 2 * self.bvp.nf] = (U / self.bvp.uscale).ravel()
        z[-3] = math.log(T)
        z[-2] = t1 / self.s1
        z[-1] = t2 / self.s2
        return z

    def unpack(self, z):
        U = z[: 2 * self.bvp.nf].reshape(self.bvp.nf, 2) * self.bvp.uscale
        T = math.exp(min(z[-3], 700.0))
        return U, T, z[-2] * self.s1, z[-1] * self.s2

    def residual(self, z, phase_row):
        U, T, t1, t2 = self.unpack(z)
        try:
            p = self.params_at(t1, t2)
        except DomainError:
            return np.full(2 * self.bvp.nf + 2, np.nan)
        bvp = self.bvp
        save = bvp.base
        bvp.base = p
        r = bvp.residual(U, T, p.get(self.p1), phase_row)
        g = bvp.div_integral(U, p.get(self.p1))
        bvp.base = save
        return np.concatenate([r, [g / max(self.base.r, self.base.s)]])

    def jacobian(self, z, phase_row):
        U, T, t1, t2 = self.unpack(z)
        try:
            self.params_at(t1, t2)
        except DomainError:
            return np.full((2 * self.bvp.nf + 2, 2 * self.bvp.nf + 3), np.nan)
        bvp = self.bvp
        n_u = 2 * bvp.nf
        ncols = n_u + 3
        # columns for U and logT and p1 from the bvp assembly; p2 via FD
        save = bvp.base
        bvp.base = self.params_at(t1, t2)
        A_bvp = bvp.jacobian(U, T, t1, phase_row, dtheta=True)
        row_div = bvp.div_row(U, t1, dtheta=True, stheta=1.0)
        bvp.base = save
        nrows = A_bvp.shape[0] + 1
        M = np.zeros((nrows, ncols))
        M[:-1, : n_u + 1] = A_bvp[:, : n_u + 1]
        M[:-1, n_u + 1] = A_bvp[:, n_u + 1] * self.s1
        M[-1, : n_u + 1] = row_div[: n_u + 1] / max(self.base.r, self.base.s)
        M[-1, n_u + 1] = row_div[-1] * self.s1 / max(self.base.r, self.base.s)
        # p2 column by central differences on the packed residual
        h = 1e-7
        zp, zm = z.copy(), z.copy()
        zp[-1] += h
        zm[-1] -= h
        M[:, -1] = (self.residual(zp, phase_row) - self.residual(zm, phase_row)) / (2 * h)
        return M


def continue_snl_curve(seed_cycle: cy.Cycle, p1: str, p2: str, ranges,
                       opts: SNLCurveOptions | None = None) -> CurveTwoPar:
    """Follow a fold-of-cycles locus through the (p1, p2) plane.

    ``seed_cycle`` must be a refined SNL cycle with which_param == p1; both
    parameter values are read off its base/param fields.
    """
    opts = opts or SNLCurveOptions()
    base = seed_cycle.base.with_(**{p1: seed_cycle.param})
    (lo1, hi1), (lo2, hi2) = ranges
    halves = []
    for sgn in (+1, -1):
        samples, codim2 = _trace_snl(seed_cycle, base, p1, p2, ranges, opts, sgn)
        halves.append((samples, codim2))
    samples = list(reversed(halves[1][0][1:])) + halves[0][0]
    codim2 = _dedupe_codim2(halves[1][1] + halves[0][1], p1, p2)
    return CurveTwoPar(kind="SNLCurve", p1=p1, p2=p2, samples=samples, codim2=codim2,
                       provenance={"ranges": ranges})


def _dedupe_codim2(points, p1, p2, tol=1e-4):
    out = []
    for s in points:
        key = (s.kind, s.diagnostics.get("fold_of"))
        dup = False
        for q in out:
            if (q.kind, q.diagnostics.get("fold_of")) == key and \
                    abs(q.diagnostics[p1] - s.diagnostics[p1]) < tol * max(1, abs(s.diagnostics[p1])) and \
                    abs(q.diagnostics[p2] - s.diagnostics[p2]) < tol * max(1, abs(s.diagnostics[p2])):
                dup = True
                break
        if not dup:
            out.append(s)
    return out


def _trace_snl(seed_cycle, base, p1, p2, ranges, opts, sgn):
    (lo1, hi1), (lo2, hi2) = ranges
    taus, states = seed_cycle.taus.copy(), seed_cycle.states.copy()
    T = seed_cycle.period
    sys_ = _SNLSystem(base, p1, p2, taus, seed_cycle.ntst, seed_cycle.ncol)
    phase_row = sys_.bvp.make_phase_row(states)
    z = sys_.pack(states, T, base.get(p1), base.get(p2))
    seed_dir = np.zeros_like(z)
    seed_dir[-1] = sgn
    t = _snl_tangent(sys_, z, phase_row, seed_dir, opts)
    samples = [_snl_sample(sys_, z)]
    codim2 = []
    tangents = [t]
    ds = opts.ds0
    amp_prev = None
    for _ in range(opts.max_steps):
        ds_eff = ds
        if amp_prev is not None and amp_prev < 0.06:
            ds_eff = min(ds, max(0.25 * amp_prev, 10 * opts.ds_min))
        znew, iters = _snl_correct(sys_, z + ds_eff * t, t, phase_row, opts)
        if znew is None:
            ds *= opts.shrink
            if ds < opts.ds_min:
                break
            continue
        U, T, t1, t2 = sys_.unpack(znew)
        amp = np.linalg.norm((U.max(axis=0) - U.min(axis=0)) / sys_.bvp.uscale)
        amp_prev = amp
        sample = _snl_sample(sys_, znew)
        if not (lo1 <= t1 <= hi1 and lo2 <= t2 <= hi2):
            samples.append(sample)
            break
        samples.append(sample)
        tnew = _snl_tangent(sys_, znew, phase_row, t, opts)
        tangents.append(tnew)
        if amp < opts.amp_floor:
            sample["end"] = "GH"
            break
        # parameter folds and cusp detection from tangent sign changes
        tp1_a, tp1_b = tangents[-2][-2], tangents[-1][-2]
        tp2_a, tp2_b = tangents[-2][-1], tangents[-1][-1]
        flip1, flip2 = tp1_a * tp1_b < 0, tp2_a * tp2_b < 0
        if (flip1 or flip2) and amp > 8 * opts.amp_floor:
            comp = -2 if flip1 else -1
            zf, sf = _refine_snl_special(sys_, z, znew, phase_row, comp, opts)
            kind = (SpecialKind.CPL if (flip1 and flip2)
                    else SpecialKind.FOLD)
            fold_of = p1 if flip1 else p2
            codim2.append(SpecialPoint(kind, sf[p1], sf["x"], sf["y"],
                                       {**sf, "fold_of": fold_of}))
        # remesh and roll forward
        new_taus, new_states = cy._remesh(sys_.bvp.taus, U, sys_.bvp.ntst, sys_.bvp.ncol)
        sys_.rebuild(new_taus)
        phase_row = sys_.bvp.make_phase_row(new_states)
        z = sys_.pack(new_states, T, t1, t2)
        t = _snl_tangent(sys_, z, phase_row, tnew, opts)
        if iters <= 4:
            ds = min(ds * opts.grow, opts.ds_max)
    return samples, codim2


def _snl_sample(sys_, z):
    U, T, t1, t2 = sys_.unpack(z)
    return {sys_.p1: t1, sys_.p2: t2, "x": 0.5 * (U[:, 0].min() + U[:, 0].max()),
            "y": 0.5 * (U[:, 1].min() + U[:, 1].max()), "period": T,
            "x_min": float(U[:, 0].min()), "x_max": float(U[:, 0].max()),
            "y_min": float(U[:, 1].min()), "y_max": float(U[:, 1].max())}


def _snl_correct(sys_, z_pred, direction, phase_row, opts):
    z = z_pred.copy()
    for it in range(opts.max_newton):
        r = sys_.residual(z, phase_row)
        if not np.all(np.isfinite(r)):
            return None, it
        g = float(direction @ (z - z_pred))
        rr = np.concatenate([r, [g]])
        if np.abs(r).max() < opts.newton_tol and abs(g) < opts.newton_tol:
            return z, it
        M = np.vstack([sys_.jacobian(z, phase_row), direction])
        if not np.all(np.isfinite(M)):
            return None, it
        try:
            dz = np.linalg.solve(M, -rr)
        except np.linalg.LinAlgError:
            return None, it
        z = z + dz
        if not np.all(np.isfinite(z)):
            return None, it
    return None, opts.max_newton


def _snl_tangent(sys_, z, phase_row, prev, opts):
    M = np.vstack([sys_.jacobian(z, phase_row), prev])
    if not np.all(np.isfinite(M)):
        return prev
    rhs = np.zeros(M.shape[0])
    rhs[-1] = 1.0
    try:
        t = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        return prev
    n = np.linalg.norm(t)
    if n == 0 or not np.all(np.isfinite(t)):
        return prev
    t = t / n
    return t if float(prev @ t) >= 0 else -t


def _refine_snl_special(sys_, zA, zB, phase_row, comp, opts):
    """Bisect the tangent-component sign change on the chord [zA, zB]."""
    d = zB - zA
    nrm = np.linalg.norm(d)
    if nrm == 0:
        return zA, _snl_sample(sys_, zA)
    d = d / nrm
    tA = _snl_tangent(sys_, zA, phase_row, d, opts)
    fA = tA[comp]
    lo, hi = 0.0, 1.0
    zbest = zB
    for _ in range(40):
        f = 0.5 * (lo + hi)
        z, _ = _snl_correct(sys_, zA + f * (zB - zA), d, phase_row, opts)
        if z is None:
            hi = f
            continue
        zbest = z
        val = _snl_tangent(sys_, z, phase_row, d, opts)[comp]
        if val == 0.0 or hi - lo < 1e-12:
            break
        if (val > 0) == (fA > 0):
            lo = f
        else:
            hi = f
    return zbest, _snl_sample(sys_, zbest)


def refine_param_fold(curve_sys, zA, zB, comp, opts):
    """Bisect the sign change of the tangent component ``comp`` (2 for p1,
    3 for p2) between two consecutive curve points."""
    d = zB - zA
    nrm = np.linalg.norm(d)
    if nrm == 0:
        return zA
    d = d / nrm
    fA = _tangent_curve(curve_sys, zA, d, opts)[comp]
    lo, hi = 0.0, 1.0
    zbest = zB
    for _ in range(opts.refine_iters):
        f = 0.5 * (lo + hi)
        z, _ = _newton_curve(curve_sys, zA + f * (zB - zA), d, opts)
        if z is None:
            hi = f
            continue
        zbest = z
        val = _tangent_curve(curve_sys, z, d, opts)[comp]
        if val == 0.0 or hi - lo < 1e-14:
            break
        if (val > 0) == (fA > 0):
            lo = f
        else:
            hi = f
    return zbest


def curve_param_folds(p: Params, curve: CurveTwoPar, opts: TwoParOptions | None = None):
    """Fold points of a FoldCurve/HopfCurve with respect to each parameter,
    refined by tangent bisection (Newton-corrected)."""
    opts = opts or TwoParOptions()
    which = "fold" if curve.kind == "FoldCurve" else "hopf"
    sys_ = _EqCurveSystem(p, curve.p1, curve.p2, which)
    zs = [sys_.pack(s["x"], s["y"], s[curve.p1], s[curve.p2]) for s in curve.samples]
    out = []
    for comp, name in ((2, curve.p1), (3, curve.p2)):
        vals = [z[comp] for z in zs]
        d = np.diff(vals)
        for i in range(len(d) - 1):
            if d[i] * d[i + 1] < 0 and abs(d[i]) > 0:
                zr = refine_param_fold(sys_, zs[i], zs[i + 2], comp, opts)
                dd = sys_.diagnostics(zr)
                out.append({"fold_of": name, curve.p1: dd[curve.p1],
                            curve.p2: dd[curve.p2], "x": dd["x"], "y": dd["y"]})
    return out
