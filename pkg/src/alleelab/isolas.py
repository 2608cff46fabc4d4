"""Isola/mushroom scans: branch topology as a second parameter moves.

An isola of cycles is disconnected from every equilibrium branch, so it
cannot be seeded from a Hopf point at its own parameter slice.  The scan
therefore walks a carrier cycle from a reference slice (where the branch is
open and Hopf-seeded) through the second parameter, re-traces the full
branch at each requested value, and re-centers the carrier on the widest
part of the new branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import cycles as cy
from . import studies
from .errors import AlleeLabError, BVPDivergence
from .model import Params


@dataclass
class IsolaScanResult:
    over: str
    values: list
    topologies: dict = field(default_factory=dict)   # value -> "Isola"|"Mushroom"|"Plain"|"none"
    branches: dict = field(default_factory=dict)     # value -> CycleBranch
    fold_counts: dict = field(default_factory=dict)


def recast(c: cy.Cycle, which: str) -> cy.Cycle:
    """Equivalent cycle with a different active parameter."""
    if c.which_param == which:
        return replace(c)
    base = c.base if not c.which_param else c.base.with_(**{c.which_param: c.param})
    return replace(c, which_param=which, param=base.get(which), base=base)


def _reconverge(c: cy.Cycle, opts) -> cy.Cycle:
    bvp = cy._BVP(c.base, c.which_param, c.taus, c.ntst, c.ncol)
    row = bvp.make_phase_row(c.states)
    U, T, ok = cy.solve_fixed(bvp, c.states, c.period, c.param, row, opts)
    if not ok:
        raise BVPDivergence("cycle re-convergence failed")
    return replace(c, states=U, period=T)


def walk_carrier(carrier: cy.Cycle, over: str, target: float,
                 opts: cy.CycleOptions | None = None) -> cy.Cycle:
    """Continue one cycle in ``over`` until it reaches the target value."""
    opts = opts or cy.CycleOptions()
    seed = recast(carrier, over)
    here = seed.param
    if here == target:
        return _reconverge(seed, opts)
    span = abs(target - here)
    window = (min(here, target) - 0.05 * span, max(here, target) + 0.05 * span)
    br = cy.continue_cycle(seed, over, window, opts=opts)
    ps = br.params()
    if not (ps.min() - 1e-12 <= target <= ps.max() + 1e-12):
        raise BVPDivergence(
            f"carrier walk covered {over} in [{ps.min():.6g}, {ps.max():.6g}], "
            f"target {target:.6g} unreachable (branch folded)")
    i = int(np.argmin(np.abs(ps - target)))
    c = br.cycles[i]
    c = replace(c, param=target)
    return _reconverge(c, opts)


def carrier_of(cbr: cy.CycleBranch) -> cy.Cycle:
    """A robust interior representative: the widest cycle near the middle of
    the branch's parameter extent (maximises margin when the window shrinks)."""
    ps = cbr.params()
    mid = 0.5 * (ps.min() + ps.max())
    width = max(ps.max() - ps.min(), 1e-12)
    near = [c for c in cbr.cycles if abs(c.param - mid) < 0.25 * width]
    pool = near or cbr.cycles
    return max(pool, key=lambda c: c.amp_norm())


def trace_branch_at(base: Params, which: str, prange,
                    carrier: cy.Cycle | None = None,
                    opts: cy.CycleOptions | None = None) -> cy.CycleBranch:
    """Cycle branch over ``which``, Hopf-seeded or carrier-seeded."""
    opts = opts or cy.CycleOptions()
    if carrier is None:
        br = studies.equilibrium_branch(base, which, prange)
        return studies.cycle_branch_from_hopf(base, br, prange=prange, opts=opts)
    seed = _reconverge(recast(carrier, which), opts)
    return cy.continue_cycle(seed, which, prange, opts=opts)


def branch_via_carrier(carrier: cy.Cycle, in_param: str, in_range, over: str,
                       target: float, opts: cy.CycleOptions,
                       max_stages: int = 6):
    """Branch at ``over``=target, staging the carrier walk and re-centering
    on the intermediate branch whenever a direct walk folds back."""
    try:
        moved = walk_carrier(carrier, over, target, opts)
        return cy.continue_cycle(recast(moved, in_param), in_param, in_range, opts=opts)
    except AlleeLabError:
        if max_stages <= 0:
            raise
    here = recast(carrier, over).param
    mid = 0.5 * (here + target)
    moved_mid = walk_carrier(carrier, over, mid, opts)
    cbr_mid = cy.continue_cycle(recast(moved_mid, in_param), in_param, in_range, opts=opts)
    new_carrier = carrier_of(cbr_mid)
    if new_carrier.amp_norm() < 0.02:
        raise BVPDivergence("carrier amplitude collapsed during staging")
    return branch_via_carrier(new_carrier, in_param, in_range, over, target,
                              opts, max_stages - 1)


def isola_scan(base: Params, in_param: str, in_range, over: str, values,
               opts: cy.CycleOptions | None = None) -> IsolaScanResult:
    """Classify the ``in_param`` branch topology at each ``over`` value.

    The reference slice is the base point itself, which must yield a
    Hopf-seeded branch; values are visited nearest-first.
    """
    opts = opts or cy.CycleOptions()
    res = IsolaScanResult(over=over, values=list(values))
    ref = base.get(over)
    cbr0 = trace_branch_at(base, in_param, in_range, opts=opts)
    res.branches[ref] = cbr0
    carrier = carrier_of(cbr0)
    for v in sorted(values, key=lambda v: abs(v - ref)):
        try:
            cbr = branch_via_carrier(carrier, in_param, in_range, over, v, opts)
            res.branches[v] = cbr
            res.fold_counts[v] = cbr.fold_count()
            res.topologies[v] = cy.classify_branch_topology(cbr)
            cand = carrier_of(cbr)
            if cand.amp_norm() > 0.05:
                carrier = cand
        except AlleeLabError:
            res.topologies[v] = "none"
            res.fold_counts[v] = 0
    return res


def isola_window_edge(carrier: cy.Cycle, in_param: str, in_range, over: str,
                      lo: float, hi: float, lo_closed: bool,
                      tol: float = 2e-3, opts: cy.CycleOptions | None = None) -> float:
    """Bisect the edge of the closed-branch (isola) window in ``over``.

    ``lo_closed`` says whether the lo end of the bracket carries an isola;
    the carrier must live on a closed branch inside the window.
    """
    opts = opts or cy.CycleOptions()
    while (hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        topo = "none"
        try:
            cbr = branch_via_carrier(carrier, in_param, in_range, over, mid, opts)
            topo = cy.classify_branch_topology(cbr)
            if topo == "Isola":
                cand = carrier_of(cbr)
                if cand.amp_norm() > 0.05:
                    carrier = cand
        except AlleeLabError:
            topo = "none"
        if (topo == "Isola") == lo_closed:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
