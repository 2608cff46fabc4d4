"""Periodic-orbit continuation by orthogonal collocation.

Cycles are discretized AUTO-style: NTST mesh intervals, a degree-NCOL
Lagrange polynomial per interval through NCOL+1 equally spaced local points,
collocation imposed at the Gauss-Legendre nodes, an integral phase condition
against the previous solution, and explicit periodicity rows.  The raw field
is collocated (periods are in model time units); prey density is clamped at
a tiny positive value so that failed trial steps cannot leave the domain.
The period enters the unknown vector as log T, which keeps arclength steps
geometric during near-homoclinic period blow-up.  The mesh is
re-equidistributed on state-space arclength after every accepted step.

Saddle-node points of cycles (SNL) are folds of the branch in the active
parameter; they are refined by Newton on the extended system
{collocation, periodicity, phase, integral of div f = 0}, the last row being
the exact planar fold-of-cycles condition (the nontrivial Floquet multiplier
is exp(T * integral div)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import equilibria, model, oracle
from .continuation import SpecialKind, SpecialPoint, Topology
from .errors import (BVPDivergence, DomainError, IllConditionedMonodromy,
                     IncompleteBranch, MeshCollapse, NoPeriodBlowup)
from .model import Params

NTST_DEFAULT = 50
NCOL_DEFAULT = 4
X_CLAMP_FRACTION = 1e-12


def _gauss_nodes(ncol: int):
    x, w = np.polynomial.legendre.leggauss(ncol)
    return 0.5 * (x + 1.0), 0.5 * w


def _lagrange_matrices(ncol: int):
    """Values/derivatives of the NCOL+1 equispaced local basis at Gauss nodes."""
    nodes = np.linspace(0.0, 1.0, ncol + 1)
    zg, wg = _gauss_nodes(ncol)
    Lval = np.empty((ncol, ncol + 1))
    Lder = np.empty((ncol, ncol + 1))
    for j in range(ncol + 1):
        others = np.delete(nodes, j)
        den = np.prod(nodes[j] - others)
        for g, z in enumerate(zg):
            Lval[g, j] = np.prod(z - others) / den
            dsum = 0.0
            for mth in range(ncol):
                rest = np.delete(others, mth)
                dsum += np.prod(z - rest)
            Lder[g, j] = dsum / den
    return zg, wg, Lval, Lder


_BASIS_CACHE: dict = {}


def basis(ncol: int):
    if ncol not in _BASIS_CACHE:
        _BASIS_CACHE[ncol] = _lagrange_matrices(ncol)
    return _BASIS_CACHE[ncol]


@dataclass
class Cycle:
    """One discretized periodic orbit.

    ``taus`` are the NTST+1 mesh breakpoints in [0, 1]; ``states`` holds the
    fine grid (NTST*NCOL + 1 points, 2 components), the last point matching
    the first to within the periodicity residual.
    """

    taus: np.ndarray
    states: np.ndarray
    period: float
    param: float
    which_param: str
    base: Params
    ntst: int
    ncol: int
    floquet_mod: float = math.nan
    flag: str = ""

    def params_at(self) -> Params:
        if self.which_param:
            return self.base.with_(**{self.which_param: self.param})
        return self.base

    def amplitude(self) -> dict:
        xs, ys = self.states[:, 0], self.states[:, 1]
        return {"x_min": float(xs.min()), "x_max": float(xs.max()),
                "y_min": float(ys.min()), "y_max": float(ys.max())}

    def amp_norm(self) -> float:
        a = self.amplitude()
        return math.hypot((a["x_max"] - a["x_min"]) / self.base.k,
                          (a["y_max"] - a["y_min"]) / (self.base.n * self.base.k))


@dataclass
class CycleBranch:
    which_param: str
    cycles: list
    specials: list
    topology: Topology
    end_reasons: tuple
    provenance: dict = field(default_factory=dict)

    def params(self) -> np.ndarray:
        return np.array([c.param for c in self.cycles])

    def fold_count(self) -> int:
        return sum(1 for s in self.specials if s.kind is SpecialKind.SNL)


@dataclass
class CycleOptions:
    ntst: int = NTST_DEFAULT
    ncol: int = NCOL_DEFAULT
    newton_tol: float = 1e-9
    max_newton: int = 10
    ds0: float = 5e-3
    ds_max: float = 8e-2
    ds_min: float = 1e-9
    grow: float = 1.4
    shrink: float = 0.4
    max_steps: int = 3000
    amp_floor: float = 2e-4
    t_hom_factor: float = 1e3
    closure_tol: float = 3e-5
    max_period_factor: float = 1e9


def _fine_taus(taus, ntst, ncol):
    out = [taus[0]]
    for i in range(ntst):
        h = taus[i + 1] - taus[i]
        for j in range(1, ncol + 1):
            out.append(taus[i] + h * j / ncol)
    return np.array(out)


class _BVP:
    """Residual/Jacobian assembly on one (mesh, base-params) configuration."""

    def __init__(self, p: Params, which_param: str, taus: np.ndarray, ntst: int, ncol: int):
        self.base = p
        self.which = which_param
        self.taus = taus
        self.ntst = ntst
        self.ncol = ncol
        self.zg, self.wg, self.Lval, self.Lder = basis(ncol)
        self.nf = ntst * ncol + 1
        self.sx = p.k
        self.sy = p.n * p.k
        self.x_clamp = X_CLAMP_FRACTION * p.k
        self.fscale = np.array([max(p.r, p.s) * p.k, p.s * p.n * p.k])
        self.uscale = np.array([self.sx, self.sy])

    def params_at(self, theta):
        return self.base.with_(**{self.which: theta})

    def interval_values(self, U):
        idx = np.arange(self.ntst)[:, None] * self.ncol + np.arange(self.ncol + 1)[None, :]
        blocks = U[idx]                                     # (ntst, ncol+1, 2)
        ug = np.einsum("gj,ijc->igc", self.Lval, blocks)    # (ntst, ncol, 2)
        dg = np.einsum("gj,ijc->igc", self.Lder, blocks)
        return ug, dg

    def _fields(self, ug, p):
        xs = np.maximum(ug[..., 0], self.x_clamp)
        ys = ug[..., 1]
        return xs, ys

    def residual(self, U, T, theta, phase_row):
        try:
            p = self.params_at(theta)
        except DomainError:
            return np.full(2 * self.ntst * self.ncol + 3, np.nan)
        h = np.diff(self.taus)[:, None, None]
        ug, dg = self.interval_values(U)
        xs, ys = self._fields(ug, p)
        with np.errstate(over="ignore", invalid="ignore"):
            f1, f2 = model.rhs_vec(xs, ys, p)
            coll = dg / h - T * np.stack([f1, f2], axis=-1)
        coll = (coll / self.fscale).ravel()
        per = (U[-1] - U[0]) / self.uscale
        ph = float(phase_row @ U.ravel())
        return np.concatenate([coll, per, [ph]])

    def make_phase_row(self, Uref):
        """Row r with r . U.ravel() = integral <u/uscale^2, du_ref/dtau> dtau."""
        _, dgref = self.interval_values(Uref)
        scal = 1.0 / self.uscale**2
        # quadrature: sum_g w_g h_i <u(z_ig), duref/dtau(z_ig)>; dgref is the
        # local-coordinate derivative = h_i * du/dtau, so h_i cancels
        contrib = np.einsum("g,gj,igc->ijc", self.wg, self.Lval, dgref * scal)
        row2 = np.zeros((self.nf, 2))
        idx = (np.arange(self.ntst)[:, None] * self.ncol
               + np.arange(self.ncol + 1)[None, :])
        np.add.at(row2, idx.ravel(), contrib.reshape(-1, 2))
        return row2.ravel()

    def jacobian(self, U, T, theta, phase_row, dtheta: bool):
        """Rows over unknowns (U/uscale, log T [, theta/stheta later])."""
        try:
            p = self.params_at(theta)
        except DomainError:
            ncols = 2 * self.nf + 1 + (1 if dtheta else 0)
            return np.full((2 * self.ntst * self.ncol + 3, ncols), np.nan)
        h = np.diff(self.taus)
        ug, _ = self.interval_values(U)
        xs, ys = self._fields(ug, p)
        ntst, ncol = self.ntst, self.ncol
        ncols = 2 * self.nf + 1 + (1 if dtheta else 0)
        nrows = 2 * ntst * ncol + 2 + 1
        A = np.zeros((nrows, ncols))
        (j11, j12), (j21, j22) = model.jacobian_vec(xs, ys, p)
        f1, f2 = model.rhs_vec(xs, ys, p)
        Jf = np.empty((ntst, ncol, 2, 2))
        Jf[..., 0, 0], Jf[..., 0, 1] = j11, j12
        Jf[..., 1, 0], Jf[..., 1, 1] = j21, j22
        # interval blocks (ntst, ncol, 2, ncol+1, 2): row (g, a), col (j, b)
        eye = np.eye(2)
        blocks = (np.einsum("gj,i,ab->igajb", self.Lder, 1.0 / h, eye)
                  - T * np.einsum("gj,igab->igajb", self.Lval, Jf))
        blocks *= (self.uscale[None, None, None, None, :]
                   / self.fscale[None, None, :, None, None])
        blocks = blocks.reshape(ntst, 2 * ncol, 2 * (ncol + 1))
        for i in range(ntst):
            r0, c0 = 2 * ncol * i, 2 * ncol * i
            A[r0: r0 + 2 * ncol, c0: c0 + 2 * (ncol + 1)] += blocks[i]
        col_t = np.stack([-T * f1 / self.fscale[0], -T * f2 / self.fscale[1]],
                         axis=-1).reshape(-1)
        A[: 2 * ntst * ncol, 2 * self.nf] = col_t
        if dtheta:
            d1, d2 = model.rhs_param_deriv(xs, ys, p, self.which)
            d1 = np.broadcast_to(d1, xs.shape)
            d2 = np.broadcast_to(d2, xs.shape)
            col_p = np.stack([-T * d1 / self.fscale[0], -T * d2 / self.fscale[1]],
                             axis=-1).reshape(-1)
            A[: 2 * ntst * ncol, 2 * self.nf + 1] = col_p
        r = 2 * ntst * ncol
        A[r, 0] = -1.0
        A[r, 2 * (self.nf - 1)] = 1.0
        A[r + 1, 1] = -1.0
        A[r + 1, 2 * (self.nf - 1) + 1] = 1.0
        A[r + 2, : 2 * self.nf] = phase_row * np.tile(self.uscale, self.nf)
        return A

    def div_integral(self, U, theta):
        try:
            p = self.params_at(theta)
        except DomainError:
            return math.nan
        ug, _ = self.interval_values(U)
        xs, ys = self._fields(ug, p)
        (j11, _), (_, j22) = model.jacobian_vec(xs, ys, p)
        h = np.diff(self.taus)
        return float(np.sum((j11 + j22) * self.wg[None, :] * h[:, None]))

    def div_row(self, U, theta, dtheta: bool, stheta: float = 1.0):
        """Gradient of div_integral over (U/uscale, logT [, theta/stheta])."""
        try:
            p = self.params_at(theta)
        except DomainError:
            ncols = 2 * self.nf + 1 + (1 if dtheta else 0)
            return np.full(ncols, np.nan)
        ug, _ = self.interval_values(U)
        xs, ys = self._fields(ug, p)
        gx, gy = model_divergence_gradients(xs, ys, p)
        h = np.diff(self.taus)
        grad = np.stack([gx * self.sx, gy * self.sy], axis=-1)   # (ntst, ncol, 2)
        contrib = np.einsum("g,i,gj,igc->ijc", self.wg, h, self.Lval, grad)
        row2 = np.zeros((self.nf, 2))
        idx = (np.arange(self.ntst)[:, None] * self.ncol
               + np.arange(self.ncol + 1)[None, :])
        np.add.at(row2, idx.ravel(), contrib.reshape(-1, 2))
        ncols = 2 * self.nf + 1 + (1 if dtheta else 0)
        row = np.zeros(ncols)
        row[: 2 * self.nf] = row2.ravel()
        if dtheta:
            eps = 1e-7 * (1.0 + abs(theta))
            dplus = self.div_integral(U, theta + eps)
            dminus = self.div_integral(U, theta - eps)
            row[-1] = (dplus - dminus) / (2 * eps) * stheta
        return row


def model_divergence_gradients(x, y, p: Params):
    """(d div/dx, d div/dy) of the raw field on arrays (exact)."""
    D = x * x + p.c * x + p.a
    Dp = 2.0 * x + p.c
    # div = J11 + J22
    ddx = (-2.0 * p.r / p.k + 2.0 * p.m * p.b / (x + p.b) ** 3
           + p.q * y * (2.0 * x * D**2 - (x * x - p.a) * 2.0 * D * Dp) / D**4
           + 2.0 * p.s * y / (p.n * x * x))
    ddy = p.q * (x * x - p.a) / D**2 - 2.0 * p.s / (p.n * x)
    return ddx, ddy


def _pack(bvp, U, T, theta, with_theta, stheta):
    z = np.empty(2 * bvp.nf + 1 + (1 if with_theta else 0))
    z[: 2 * bvp.nf] = (U / bvp.uscale).ravel()
    z[2 * bvp.nf] = math.log(T)
    if with_theta:
        z[2 * bvp.nf + 1] = theta / stheta
    return z


def _unpack(bvp, z, with_theta, stheta, theta_fixed=None):
    U = (z[: 2 * bvp.nf].reshape(bvp.nf, 2)) * bvp.uscale
    T = math.exp(min(z[2 * bvp.nf], 700.0))
    theta = z[2 * bvp.nf + 1] * stheta if with_theta else theta_fixed
    return U, T, theta


def solve_fixed(bvp, U0, T0, theta, phase_row, opts):
    """Newton at fixed parameter; unknowns (U, log T)."""
    z = _pack(bvp, U0, T0, theta, False, 1.0)
    for _ in range(opts.max_newton):
        U, T, _ = _unpack(bvp, z, False, 1.0, theta)
        r = bvp.residual(U, T, theta, phase_row)
        if np.abs(r).max() < opts.newton_tol:
            return U, T, True
        A = bvp.jacobian(U, T, theta, phase_row, dtheta=False)
        try:
            dz = np.linalg.solve(A, -r)
        except np.linalg.LinAlgError:
            return U, T, False
        z = z + dz
        if not np.all(np.isfinite(z)):
            return U, T, False
    U, T, _ = _unpack(bvp, z, False, 1.0, theta)
    return U, T, np.abs(bvp.residual(U, T, theta, phase_row)).max() < opts.newton_tol


def solve_snl(bvp, U0, T0, theta0, phase_row, stheta, opts):
    """Newton on {collocation, periodicity, phase, integral div = 0}."""
    z = _pack(bvp, U0, T0, theta0, True, stheta)
    for _ in range(opts.max_newton + 5):
        U, T, theta = _unpack(bvp, z, True, stheta)
        r_bvp = bvp.residual(U, T, theta, phase_row)
        g = bvp.div_integral(U, theta)
        if not (np.all(np.isfinite(r_bvp)) and math.isfinite(g)):
            return U, T, theta, False
        r = np.concatenate([r_bvp, [g]])
        if np.abs(r_bvp).max() < opts.newton_tol and abs(g) < 1e-10 * max(bvp.base.r, bvp.base.s):
            return U, T, theta, True
        A = bvp.jacobian(U, T, theta, phase_row, dtheta=True)
        A[:, -1] *= stheta
        row = bvp.div_row(U, theta, dtheta=True, stheta=stheta)
        M = np.vstack([A, row])
        try:
            dz = np.linalg.solve(M, -r)
        except np.linalg.LinAlgError:
            return U, T, theta, False
        z = z + dz
        if not np.all(np.isfinite(z)):
            return U, T, theta, False
    return U, T, theta, False


def eval_piecewise(taus, states, ntst, ncol, t_new):
    """Evaluate the piecewise collocation polynomial at new fine points."""
    nodes = np.linspace(0.0, 1.0, ncol + 1)
    t_new = np.clip(np.asarray(t_new), taus[0], taus[-1])
    iv = np.clip(np.searchsorted(taus, t_new, side="right") - 1, 0, ntst - 1)
    h = taus[iv + 1] - taus[iv]
    zloc = (t_new - taus[iv]) / h
    out = np.zeros((len(t_new), 2))
    idx = iv[:, None] * ncol + np.arange(ncol + 1)[None, :]
    vals = states[idx]                         # (m, ncol+1, 2)
    for j in range(ncol + 1):
        others = np.delete(nodes, j)
        lj = np.ones_like(zloc)
        for o in others:
            lj *= (zloc - o) / (nodes[j] - o)
        out += lj[:, None] * vals[:, j, :]
    return out


def _remesh(taus, states, ntst, ncol, floor=0.05):
    """Equidistribute state-space arclength; returns new taus and states.

    The profile is transferred with the collocation polynomial itself;
    linear reinterpolation would smear the sharp layers of long-period
    orbits and push the corrector out of its Newton basin."""
    fine_old = _fine_taus(taus, ntst, ncol)
    seg = np.linalg.norm(np.diff(states, axis=0), axis=1)
    mon = np.concatenate([[0.0], np.cumsum(seg + floor * (seg.mean() + 1e-300))])
    mon /= mon[-1]
    targets = np.linspace(0.0, 1.0, ntst + 1)
    new_taus = np.interp(targets, mon, fine_old)
    new_taus[0], new_taus[-1] = 0.0, 1.0
    new_taus = np.maximum.accumulate(new_taus)
    for i in range(1, ntst + 1):
        if new_taus[i] <= new_taus[i - 1]:
            new_taus[i] = min(new_taus[i - 1] + 1e-12, 1.0)
    new_fine = _fine_taus(new_taus, ntst, ncol)
    new_states = eval_piecewise(taus, states, ntst, ncol, new_fine)
    new_states[-1] = new_states[0]
    return new_taus, new_states


def seed_cycle_at_hopf(p: Params, xstar: float, which_param: str, eps: float = 1e-3,
                       opts: CycleOptions | None = None) -> Cycle:
    """Converge a small cycle near a Hopf point by pinning its amplitude.

    The active parameter is freed (one extra unknown) and the pin
    <seed direction, U - u*> = eps closes the system; this is the standard
    branch-switching step and lands on a genuine cycle whose parameter sits
    O(eps^2) away from the exact Hopf value.
    """
    opts = opts or CycleOptions()
    J = model.jacobian((xstar, p.n * xstar), p)
    omega, TR = oracle.rotation_frame(J)
    v_im, v_re = TR[:, 0], TR[:, 1]
    nrm = max(np.linalg.norm(v_re / np.array([p.k, p.n * p.k])),
              np.linalg.norm(v_im / np.array([p.k, p.n * p.k])))
    v_re, v_im = v_re / nrm, v_im / nrm   # O(1) in scaled units
    ntst, ncol = opts.ntst, opts.ncol
    taus = np.linspace(0.0, 1.0, ntst + 1)
    tf = _fine_taus(taus, ntst, ncol)
    prof = (np.outer(np.cos(2 * np.pi * tf), v_re) - np.outer(np.sin(2 * np.pi * tf), v_im))
    u_star = np.array([xstar, p.n * xstar])
    U0 = u_star[None, :] + eps * prof
    T0 = 2 * np.pi / omega
    theta0 = p.get(which_param)
    stheta = max(abs(theta0), 1e-3)
    bvp = _BVP(p, which_param, taus, ntst, ncol)
    phase_row = bvp.make_phase_row(eps * prof)
    pin = (prof / bvp.uscale).ravel()
    pin /= np.linalg.norm(pin)
    target = float(pin @ ((U0 - u_star[None, :]) / bvp.uscale).ravel())
    z = _pack(bvp, U0, T0, theta0, True, stheta)
    ok = False
    for _ in range(opts.max_newton + 10):
        U, T, theta = _unpack(bvp, z, True, stheta)
        r_bvp = bvp.residual(U, T, theta, phase_row)
        g = float(pin @ ((U - u_star[None, :]) / bvp.uscale).ravel()) - target
        r = np.concatenate([r_bvp, [g]])
        if np.abs(r).max() < opts.newton_tol:
            ok = True
            break
        A = bvp.jacobian(U, T, theta, phase_row, dtheta=True)
        A[:, -1] *= stheta
        row = np.zeros(A.shape[1])
        row[: 2 * bvp.nf] = pin
        M = np.vstack([A, row])
        try:
            dz = np.linalg.solve(M, -r)
        except np.linalg.LinAlgError:
            break
        z = z + dz
        if not np.all(np.isfinite(z)):
            break
    if not ok:
        raise BVPDivergence("Hopf seed corrector failed")
    U, T, theta = _unpack(bvp, z, True, stheta)
    cyc = Cycle(taus=taus.copy(), states=U, period=T, param=theta,
                which_param=which_param, base=p, ntst=ntst, ncol=ncol)
    try:
        cyc.floquet_mod = abs(floquet(cyc)[1])
    except IllConditionedMonodromy:
        pass
    return cyc


def floquet(c: Cycle):
    """(trivial, nontrivial) Floquet multipliers by interval condensation."""
    p = c.params_at()
    bvp = _BVP(p, c.which_param or "m", c.taus, c.ntst, c.ncol)
    ug, _ = bvp.interval_values(c.states)
    xs, ys = bvp._fields(ug, p)
    (j11, j12), (j21, j22) = model.jacobian_vec(xs, ys, p)
    h = np.diff(c.taus)
    ncol = c.ncol
    _, _, Lval, Lder = basis(ncol)
    M = np.eye(2)
    for i in range(c.ntst):
        A = np.zeros((2 * ncol, 2 * ncol))
        B = np.zeros((2 * ncol, 2))
        for g in range(ncol):
            Jf = np.array([[j11[i, g], j12[i, g]], [j21[i, g], j22[i, g]]])
            for j in range(1, ncol + 1):
                blk = (Lder[g, j] / h[i]) * np.eye(2) - c.period * Lval[g, j] * Jf
                A[2 * g: 2 * g + 2, 2 * (j - 1): 2 * (j - 1) + 2] = blk
            B[2 * g: 2 * g + 2] = -((Lder[g, 0] / h[i]) * np.eye(2)
                                    - c.period * Lval[g, 0] * Jf)
        try:
            V = np.linalg.solve(A, B)
        except np.linalg.LinAlgError as e:
            raise IllConditionedMonodromy(str(e)) from e
        M = V[-2:, :] @ M
    lam = np.linalg.eigvals(M)
    if not np.all(np.isfinite(np.abs(lam))):
        raise IllConditionedMonodromy(f"multipliers {lam}")
    order = np.argsort(np.abs(lam - 1.0))
    return lam[order[0]], lam[order[1]]


def divergence_integral(c: Cycle) -> float:
    """exp(T * value) is the planar nontrivial multiplier; cross-check route."""
    p = c.params_at()
    bvp = _BVP(p, c.which_param or "m", c.taus, c.ntst, c.ncol)
    return bvp.div_integral(c.states, p.get(c.which_param) if c.which_param else 0.0)


def resolve_on_mesh(c: Cycle, ntst: int, opts: CycleOptions | None = None,
                    sweeps: int = 3) -> Cycle:
    """Re-solve a converged cycle on a finer mesh (fixed parameter)."""
    opts = opts or CycleOptions(ntst=ntst)
    fine_old = _fine_taus(c.taus, c.ntst, c.ncol)
    taus = np.linspace(0.0, 1.0, ntst + 1)
    tf = _fine_taus(taus, ntst, c.ncol)
    states = np.column_stack([np.interp(tf, fine_old, c.states[:, 0]),
                              np.interp(tf, fine_old, c.states[:, 1])])
    T = c.period
    ok_any = False
    for _ in range(sweeps):
        taus, states = _remesh(taus, states, ntst, c.ncol)
        bvp = _BVP(c.base, c.which_param or "m", taus, ntst, c.ncol)
        row = bvp.make_phase_row(states)
        U, T2, ok = solve_fixed(bvp, states, T, c.param if c.which_param else 0.0, row, opts)
        if ok:
            states, T, ok_any = U, T2, True
    if not ok_any:
        raise BVPDivergence("mesh-refinement resolve failed")
    return replace(c, taus=taus, states=states, period=T, ntst=ntst)


def floquet_health(c: Cycle, ntst: int = 200) -> dict:
    """Discretization health: trivial multiplier at an elevated mesh."""
    cc = resolve_on_mesh(c, ntst) if ntst > c.ntst else c
    triv, nontriv = floquet(cc)
    return {"trivial_error": abs(triv - 1.0), "nontrivial": nontriv,
            "nontrivial_div": math.exp(cc.period * divergence_integral(cc))}


def continue_cycle(seed: Cycle, which_param: str, prange, base: Params | None = None,
                   opts: CycleOptions | None = None, bidirectional: bool = True) -> CycleBranch:
    """Pseudo-arclength continuation of a converged cycle across ``prange``."""
    opts = opts or CycleOptions()
    p_base = base if base is not None else seed.base
    if seed.which_param == which_param and math.isfinite(seed.param):
        theta0 = seed.param
    else:
        theta0 = p_base.get(which_param)
    lo, hi = float(min(prange)), float(max(prange))
    stheta = hi - lo
    halves = []
    reasons = []
    specials_all = []
    closed = False
    for sgn in (+1.0, -1.0):
        cyc0 = replace(seed, which_param=which_param, base=p_base, param=theta0)
        cycs, why, specials = _trace_cycles(cyc0, sgn, (lo, hi), stheta, opts)
        halves.append(cycs)
        reasons.append(why)
        specials_all.extend(specials)
        if why == "closed":
            closed = True
            break
        if not bidirectional:
            break
    if closed or len(halves) == 1:
        allc = halves[0]
        ends = (reasons[0], reasons[0]) if closed else (reasons[0], "start")
    else:
        allc = list(reversed(halves[1][1:])) + halves[0]
        ends = (reasons[1], reasons[0])
    topo = Topology.CLOSED_LOOP if closed else Topology.OPEN_ARC
    return CycleBranch(which_param=which_param, cycles=allc, specials=specials_all,
                       topology=topo, end_reasons=ends,
                       provenance={"range": (lo, hi), "theta0": theta0})


def _tangent_cycle(bvp, z, stheta, phase_row, prev, opts):
    U, T, theta = _unpack(bvp, z, True, stheta)
    A = bvp.jacobian(U, T, theta, phase_row, dtheta=True)
    A[:, -1] *= stheta
    M = np.vstack([A, prev])
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
    if float(prev @ t) < 0:
        t = -t
    return t


def _corrector(bvp, z_pred, direction, stheta, phase_row, opts):
    z = z_pred.copy()
    for it in range(opts.max_newton):
        U, T, theta = _unpack(bvp, z, True, stheta)
        r_bvp = bvp.residual(U, T, theta, phase_row)
        if not np.all(np.isfinite(r_bvp)):
            return None, it
        g = float(direction @ (z - z_pred))
        if np.abs(r_bvp).max() < opts.newton_tol and abs(g) < opts.newton_tol:
            return z, it
        A = bvp.jacobian(U, T, theta, phase_row, dtheta=True)
        if not np.all(np.isfinite(A)):
            return None, it
        A[:, -1] *= stheta
        M = np.vstack([A, direction])
        r = np.concatenate([r_bvp, [g]])
        try:
            dz = np.linalg.solve(M, -r)
        except np.linalg.LinAlgError:
            return None, it
        if np.linalg.norm(dz) > 2.0:
            return None, it
        z = z + dz
        if not np.all(np.isfinite(z)):
            return None, it
    return None, opts.max_newton


def _summary_vec(c: Cycle, stheta):
    a = c.amplitude()
    return np.array([c.param / stheta, math.log(c.period),
                     a["x_min"] / c.base.k, a["x_max"] / c.base.k,
                     a["y_min"] / (c.base.n * c.base.k),
                     a["y_max"] / (c.base.n * c.base.k)])


def _trace_cycles(cyc0: Cycle, sgn, bounds, stheta, opts):
    lo, hi = bounds
    base, which = cyc0.base, cyc0.which_param
    bvp = _BVP(base, which, cyc0.taus, cyc0.ntst, cyc0.ncol)
    phase_row = bvp.make_phase_row(cyc0.states)
    z = _pack(bvp, cyc0.states, cyc0.period, cyc0.param, True, stheta)
    seed_dir = np.zeros_like(z)
    seed_dir[-1] = sgn
    t = _tangent_cycle(bvp, z, stheta, phase_row, seed_dir, opts)
    if t[-1] * sgn < 0:
        t = -t
    out = [replace(cyc0)]
    if math.isnan(out[0].floquet_mod):
        try:
            out[0].floquet_mod = abs(floquet(out[0])[1])
        except IllConditionedMonodromy:
            pass
    t_thetas = [t[-1]]
    t_hom = opts.t_hom_factor * cyc0.period
    snl_candidates = []
    ds = opts.ds0
    why = "maxsteps"
    for _ in range(opts.max_steps):
        amp_here = out[-1].amp_norm()
        ds_eff = min(ds, max(0.25 * amp_here, 10 * opts.ds_min)) if amp_here < 0.06 else ds
        z_pred = z + ds_eff * t
        znew, iters = _corrector(bvp, z_pred, t, stheta, phase_row, opts)
        if znew is None:
            ds *= opts.shrink
            if ds < opts.ds_min:
                why = "collapse"
                break
            continue
        cyc = _cycle_of(bvp, znew, stheta, base, which)
        tnew = _tangent_cycle(bvp, znew, stheta, phase_row, t, opts)
        if cyc.param > hi or cyc.param < lo:
            why = "range"
            out.append(cyc)
            t_thetas.append(tnew[-1])
            break
        if cyc.amp_norm() < opts.amp_floor:
            why = "hopf"
            out.append(cyc)
            t_thetas.append(tnew[-1])
            break
        out.append(cyc)
        t_thetas.append(tnew[-1])
        if t_thetas[-2] * t_thetas[-1] < 0:
            snl_candidates.append(len(out) - 2)
        if cyc.period > t_hom:
            why = "homoclinic"
            cyc.flag = "HomApprox"
            break
        if len(out) > 25:
            d0 = _summary_vec(cyc, stheta) - _summary_vec(out[0], stheta)
            step_len = np.linalg.norm(_summary_vec(cyc, stheta) - _summary_vec(out[-2], stheta))
            near = np.linalg.norm(d0) < max(opts.closure_tol, 1.2 * step_len)
            if near and np.linalg.norm(d0) < 0.2:
                why = "closed"
                break
        try:
            new_taus, new_states = _remesh(cyc.taus, cyc.states, cyc.ntst, cyc.ncol)
            bvp_new = _BVP(base, which, new_taus, cyc.ntst, cyc.ncol)
            row_new = bvp_new.make_phase_row(new_states)
            rchk = bvp_new.residual(new_states, cyc.period, cyc.param, row_new)
            if not np.all(np.isfinite(rchk)) or np.abs(rchk[:-3]).max() > 1e-2:
                raise MeshCollapse("remeshed profile off-manifold")
            bvp, phase_row = bvp_new, row_new
            z = _pack(bvp, new_states, cyc.period, cyc.param, True, stheta)
        except MeshCollapse:
            # keep the previous mesh; re-pack the accepted point on it
            z = znew
        t = _tangent_cycle(bvp, z, stheta, phase_row, tnew, opts)
        if iters <= 4:
            ds = min(ds * opts.grow, opts.ds_max)
    for c in out:
        if math.isnan(c.floquet_mod):
            try:
                c.floquet_mod = abs(floquet(c)[1])
            except IllConditionedMonodromy:
                c.floquet_mod = math.nan
    specials = []
    for idx in snl_candidates:
        sp = _refine_snl_from(out[min(idx, len(out) - 1)], stheta, opts)
        if sp is not None:
            specials.append(sp)
    return out, why, specials


def _cycle_of(bvp, z, stheta, base, which):
    U, T, theta = _unpack(bvp, z, True, stheta)
    return Cycle(taus=bvp.taus.copy(), states=U, period=T, param=theta,
                 which_param=which, base=base, ntst=bvp.ntst, ncol=bvp.ncol)


def _refine_snl_from(c: Cycle, stheta, opts):
    bvp = _BVP(c.base, c.which_param, c.taus, c.ntst, c.ncol)
    phase_row = bvp.make_phase_row(c.states)
    U, T, theta, ok = solve_snl(bvp, c.states, c.period, c.param, phase_row, stheta, opts)
    if not ok:
        return None
    # remesh for the converged profile, then polish once more
    taus2, U2 = _remesh(c.taus, U, c.ntst, c.ncol)
    bvp2 = _BVP(c.base, c.which_param, taus2, c.ntst, c.ncol)
    phase2 = bvp2.make_phase_row(U2)
    U3, T3, theta3, ok2 = solve_snl(bvp2, U2, T, theta, phase2, stheta, opts)
    if ok2:
        c = replace(c, taus=taus2)
        U, T, theta = U3, T3, theta3
    refined = replace(c, states=U, period=T, param=theta)
    try:
        mult_cond = abs(floquet(refined)[1])
    except IllConditionedMonodromy:
        mult_cond = math.nan
    # at a fold the monodromy has a double unit eigenvalue (Jordan block), so
    # condensation eigenvalues split like sqrt(profile error); the planar
    # identity mu = exp(T * integral div) is the reliable evaluator there
    mult = math.exp(T * divergence_integral(refined))
    amp = refined.amplitude()
    return SpecialPoint(SpecialKind.SNL, theta,
                        0.5 * (amp["x_min"] + amp["x_max"]),
                        0.5 * (amp["y_min"] + amp["y_max"]),
                        {"period": T, "floquet": mult, "floquet_cond": mult_cond, **amp})


def classify_branch_topology(br: CycleBranch) -> str:
    """Isola (closed loop), Mushroom (open, Hopf-to-Hopf, >= 2 folds), Plain."""
    if br.topology is Topology.CLOSED_LOOP:
        if br.fold_count() % 2 != 0:
            raise IncompleteBranch(f"closed branch with odd fold count {br.fold_count()}")
        return "Isola"
    clean = {"hopf", "range", "homoclinic", "start"}
    if not set(br.end_reasons) <= clean:
        raise IncompleteBranch(f"branch did not terminate cleanly: {br.end_reasons}")
    if br.end_reasons.count("hopf") == 2 and br.fold_count() >= 2:
        return "Mushroom"
    return "Plain"


def cycles_at(br: CycleBranch, theta: float):
    """The branch Cycle objects nearest each crossing of param = theta,
    sorted by amplitude."""
    out = []
    params = br.params()
    for i in range(len(params) - 1):
        a, b = params[i], params[i + 1]
        if a == b:
            continue
        if min(a, b) < theta <= max(a, b):
            w = (theta - a) / (b - a)
            out.append(br.cycles[i] if w < 0.5 else br.cycles[i + 1])
    out.sort(key=lambda c: c.amp_norm())
    return out


def count_cycles_at(br: CycleBranch, theta: float):
    """Cycles crossing param = theta, one per monotone branch segment."""
    out = []
    params = br.params()
    for i in range(len(params) - 1):
        a, b = params[i], params[i + 1]
        if a == b:
            continue
        if min(a, b) < theta <= max(a, b):
            w = (theta - a) / (b - a)
            c = br.cycles[i] if w < 0.5 else br.cycles[i + 1]
            aa, ab = br.cycles[i].amplitude(), br.cycles[i + 1].amplitude()
            amp = {k: (1 - w) * aa[k] + w * ab[k] for k in aa}
            out.append({"amplitude": amp, "floquet_mod": c.floquet_mod,
                        "stable": c.floquet_mod < 1.0,
                        "period": (1 - w) * br.cycles[i].period + w * br.cycles[i + 1].period})
    out.sort(key=lambda d: d["amplitude"]["x_max"] - d["amplitude"]["x_min"])
    return out


def homoclinic_approx(br: CycleBranch, hom_dist_tol_factor: float = 1e-4) -> SpecialPoint:
    """The period-threshold crossing as a homoclinic surrogate."""
    flagged = [c for c in br.cycles if c.flag == "HomApprox"]
    if not flagged:
        raise NoPeriodBlowup("no cycle on the branch crossed the period threshold")
    c = flagged[-1]
    p = c.params_at()
    saddles = [e for e in equilibria.positive_equilibria(p) if _is_saddle(p, e)]
    for e in equilibria.boundary_equilibria(p):
        if e.kind is equilibria.Kind.SADDLE:
            saddles.append(e)
    dist = math.nan
    if saddles:
        dist = min(float(np.linalg.norm(c.states - np.array([e.x, e.y])[None, :], axis=1).min())
                   for e in saddles)
    return SpecialPoint(SpecialKind.HOM_APPROX, c.param, c.states[0, 0], c.states[0, 1],
                        {"period": c.period, "saddle_distance": dist,
                         "dist_tol": hom_dist_tol_factor * c.base.k})


def _is_saddle(p, e):
    try:
        return equilibria.classify(p, e).kind is equilibria.Kind.SADDLE
    except Exception:
        return False
