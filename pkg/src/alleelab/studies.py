"""Plane-level analyses: assembling curves, codim-2 inventories and regions.

These drivers glue the one-parameter machinery (equilibrium branch, cycle
branch) to the two-parameter curves: they locate seed points, trace the fold
and Hopf curves, cluster the BT points found on both, collect GH and CPL
points, and trace SNL curves from refined fold-of-cycle seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import continuation as ct
from . import cycles as cy
from . import equilibria, twopar
from .continuation import SpecialKind
from .errors import AlleeLabError, MissingCodim2Data
from .model import Params


@dataclass
class PlaneStudy:
    p1: str
    p2: str
    curves: list = field(default_factory=list)      # CurveTwoPar
    bt_points: list = field(default_factory=list)   # (p1, p2) clustered
    gh_points: list = field(default_factory=list)
    cpl_points: list = field(default_factory=list)
    cusp_points: list = field(default_factory=list)
    snl_param_folds: list = field(default_factory=list)  # dicts with fold_of
    hopf_param_folds: list = field(default_factory=list)


def equilibrium_branch(base: Params, which: str, prange, x_start=None):
    """Equilibrium branch through the base point, starting from any root."""
    roots = equilibria.positive_equilibria(base)
    if not roots:
        raise AlleeLabError(f"no positive equilibrium at the base point for {which}")
    e0 = roots[-1] if x_start is None else min(roots, key=lambda e: abs(e.x - x_start))
    return ct.continue_equilibrium(base, e0, which, prange)


def cycle_branch_from_hopf(base: Params, branch, hopf=None, prange=None,
                           opts: cy.CycleOptions | None = None):
    hopfs = [s for s in branch.specials if s.kind is SpecialKind.HOPF
             and math.isfinite(s.diagnostics.get("l1", math.nan))
             and abs(s.diagnostics["l1"]) > 1e-10]
    if not hopfs and hopf is None:
        raise MissingCodim2Data("no nondegenerate Hopf point on the branch")
    h = hopf or max(hopfs, key=lambda s: abs(s.diagnostics["l1"]))
    seed = ct.switch_to_cycle(branch, h, base)
    rng = prange or branch.provenance["range"]
    return cy.continue_cycle(seed, branch.which_param, rng, base=base, opts=opts)


def refined_snl_cycle(cbr: cy.CycleBranch, near_param: float | None = None,
                      opts: cy.CycleOptions | None = None):
    """Re-refine the branch cycle nearest an SNL special point."""
    opts = opts or cy.CycleOptions()
    if not cbr.specials:
        raise MissingCodim2Data("cycle branch carries no SNL point")
    sp = (min(cbr.specials, key=lambda s: abs(s.param - near_param))
          if near_param is not None else cbr.specials[0])
    i = int(np.argmin([abs(c.param - sp.param)
                       + abs(0.5 * (c.amplitude()["x_min"] + c.amplitude()["x_max"]) - sp.x)
                       for c in cbr.cycles]))
    c0 = cbr.cycles[i]
    bvp = cy._BVP(c0.base, c0.which_param, c0.taus, c0.ntst, c0.ncol)
    row = bvp.make_phase_row(c0.states)
    U, T, theta, ok = cy.solve_snl(bvp, c0.states, c0.period, c0.param, row, 1.0, opts)
    if not ok:
        raise MissingCodim2Data("SNL re-refinement failed")
    return replace(c0, states=U, period=T, param=theta)


def _cluster(points, tol):
    out = []
    for pt in points:
        for q in out:
            if math.hypot(pt[0] - q[0], pt[1] - q[1]) < tol:
                break
        else:
            out.append(pt)
    return out


def plane_study(base: Params, p1: str, p2: str, ranges, slice_range,
                snl_near: float | None = None, snl_slice_base: Params | None = None,
                eq_opts=None, twopar_opts=None, cycle_opts=None,
                with_snl: bool = True) -> PlaneStudy:
    """Fold + Hopf (+ SNL) curves of the (p1, p2) plane with codim-2 points.

    ``slice_range`` is the p1-window of the one-parameter seeding slice at the
    base point.  The SNL curve is seeded from the cycle branch of the slice
    through ``snl_slice_base`` (default: the base point).
    """
    study = PlaneStudy(p1=p1, p2=p2)
    topts = twopar_opts or twopar.TwoParOptions()
    br = equilibrium_branch(base, p1, slice_range)
    folds = [s for s in br.specials if s.kind is SpecialKind.FOLD]
    hopfs = [s for s in br.specials if s.kind is SpecialKind.HOPF]
    scale2 = (ranges[0][1] - ranges[0][0]) + (ranges[1][1] - ranges[1][0])
    bts, ghs = [], []
    fold_seed = None
    if folds:
        fold_seed = (base.with_(**{p1: folds[0].param}), (folds[0].x, folds[0].y))
    if hopfs:
        h = max(hopfs, key=lambda s: s.param)
        hc = twopar.continue_hopf_curve(base.with_(**{p1: h.param}), (h.x, h.y),
                                        p1, p2, ranges, topts)
        study.curves.append(hc)
        bts += [(s.diagnostics[p1], s.diagnostics[p2]) for s in hc.codim2
                if s.kind is SpecialKind.BT]
        ghs += [(s.diagnostics[p1], s.diagnostics[p2]) for s in hc.codim2
                if s.kind is SpecialKind.GH]
        study.hopf_param_folds += twopar.curve_param_folds(
            base.with_(**{p1: h.param}), hc, topts)
        if fold_seed is None:
            # the seeding slice carries no fold; the fold curve still passes
            # through every BT found on the trace-zero curve
            bt_sp = [s for s in hc.codim2 if s.kind is SpecialKind.BT]
            if bt_sp:
                s0 = bt_sp[0]
                fold_seed = (base.with_(**{p1: s0.diagnostics[p1],
                                           p2: s0.diagnostics[p2]}),
                             (s0.diagnostics["x"], s0.diagnostics["y"]))
    if fold_seed is not None:
        fc = twopar.continue_fold_curve(fold_seed[0], fold_seed[1], p1, p2,
                                        ranges, topts)
        study.curves.append(fc)
        bts += [(s.diagnostics[p1], s.diagnostics[p2]) for s in fc.codim2
                if s.kind is SpecialKind.BT]
        study.cusp_points += [(s.diagnostics[p1], s.diagnostics[p2]) for s in fc.codim2
                              if s.kind is SpecialKind.CUSP_EQ]
    study.bt_points = _cluster(bts, 1e-3 * scale2)
    study.gh_points = _cluster(ghs, 1e-3 * scale2)
    if with_snl:
        slice_base = snl_slice_base or base
        br2 = (br if slice_base is base
               else equilibrium_branch(slice_base, p1, slice_range))
        cbr = cycle_branch_from_hopf(slice_base, br2, opts=cycle_opts)
        seed = refined_snl_cycle(cbr, near_param=snl_near, opts=cycle_opts)
        sc = twopar.continue_snl_curve(seed, p1, p2, ranges,
                                       opts=twopar.SNLCurveOptions(
                                           ntst=(cycle_opts.ntst if cycle_opts else 50)))
        study.curves.append(sc)
        study.cpl_points = _cluster([(s.diagnostics[p1], s.diagnostics[p2])
                                     for s in sc.codim2 if s.kind is SpecialKind.CPL],
                                    1e-3 * scale2)
        study.snl_param_folds += [dict(s.diagnostics) for s in sc.codim2
                                  if s.kind is SpecialKind.FOLD]
    return study


def _curve_param_folds(curve: twopar.CurveTwoPar, p1: str, p2: str):
    """Extremal points of an equilibrium codim-1 curve in each parameter."""
    out = []
    v1 = curve.array(p1)
    v2 = curve.array(p2)
    for name, v in ((p1, v1), (p2, v2)):
        d = np.diff(v)
        for i in range(len(d) - 1):
            if d[i] * d[i + 1] < 0 and abs(d[i]) > 0:
                # parabola vertex through the three samples
                y0, y1, y2 = v[i], v[i + 1], v[i + 2]
                denom = (y0 - 2 * y1 + y2)
                if denom == 0:
                    continue
                dd = 0.5 * (y0 - y2) / denom
                w = np.array([0.5 * dd * (dd - 1), 1 - dd * dd, 0.5 * dd * (dd + 1)])
                out.append({"fold_of": name,
                            p1: float(w @ v1[i:i + 3]), p2: float(w @ v2[i:i + 3])})
    return out


# -- regions ------------------------------------------------------------------

@dataclass
class RegionMap:
    p1: str
    p2: str
    regions: dict = field(default_factory=dict)   # label -> predicate info
    samples: dict = field(default_factory=dict)   # label -> (pt, signature)
    mushroom: dict = field(default_factory=dict)
    isola: dict = field(default_factory=dict)


def isola_mushroom_regions(study: PlaneStudy, base: Params) -> RegionMap:
    """Mushroom/isola windows from the SNL and Hopf curve fold data.

    In the (p1, p2) plane the isola window in the second parameter spans the
    interval between the Hopf-curve fold and the SNL-curve fold; mushroom
    dynamics live below the SNL fold value of p2 (and above the CPL value in
    the adjacent region).
    """
    rm = RegionMap(p1=study.p1, p2=study.p2)
    snl_folds = [f for f in study.snl_param_folds if f["fold_of"] == study.p2]
    if not snl_folds or not study.cpl_points:
        raise MissingCodim2Data("need an SNL fold in p2 and a CPL point")
    m1 = max(f[study.p2] for f in snl_folds)
    m_c = study.cpl_points[0][1]
    rm.mushroom = {"p2_below": m1, "p2_above_cusp": m_c,
                   "definition": f"{study.p2} < {m1:.6f} (component split at CPL "
                                 f"{study.p2} = {m_c:.6f})"}
    m_gh = study.gh_points[0][1] if study.gh_points else math.nan
    rm.isola = {"p2_low": m1, "p2_gh": m_gh,
                "definition": f"{m1:.6f} < {study.p2} (second component down to "
                              f"GH {study.p2} = {m_gh:.6f})"}
    return rm


def region_signature(p: Params, brange, cbr: cy.CycleBranch | None = None):
    """(boundary kinds, interior kinds, cycle stabilities) at one point."""
    boundary = tuple(e.kind.value for e in equilibria.boundary_equilibria(p))
    interior = []
    for e in equilibria.positive_equilibria(p):
        try:
            interior.append(equilibria.classify(p, e).kind.value)
        except Exception:
            interior.append("Degenerate")
    cycs = ()
    if cbr is not None:
        which = cbr.which_param
        counts = cy.count_cycles_at(cbr, p.get(which))
        cycs = tuple("stable" if c["stable"] else "unstable" for c in counts)
    return {"boundary": boundary, "interior": tuple(interior), "cycles": cycs}
