"""Equilibrium-branch continuation: reference structure, refinement, formats."""

import math

import numpy as np
import pytest

from alleelab import continuation as ct
from alleelab import equilibria as eq
from alleelab import io, model
from alleelab.continuation import SpecialKind, Topology
from alleelab.errors import SingularJacobianAtStart
from alleelab.model import Params

from conftest import FIG2_KW


def _specials(branch, kind):
    return [s for s in branch.specials if s.kind is kind]


def test_reference_branch_structure(fig2_eq_branch):
    # two Hopf points, one fold right next to the first, one transcritical
    hopfs = sorted(_specials(fig2_eq_branch, SpecialKind.HOPF), key=lambda s: s.param)
    folds = _specials(fig2_eq_branch, SpecialKind.FOLD)
    tcs = _specials(fig2_eq_branch, SpecialKind.TRANSCRITICAL)
    assert len(hopfs) == 2 and len(folds) == 1 and len(tcs) == 1
    hb1, hb2 = hopfs
    assert abs(hb1.param - folds[0].param) < 0.02
    assert hb1.param < hb2.param
    assert abs(tcs[0].x) <= 1e-8 * FIG2_KW["k"]
    # both Hopf points are supercritical here
    assert hb1.diagnostics["l1"] < 0 and hb2.diagnostics["l1"] < 0
    assert fig2_eq_branch.topology is Topology.OPEN_ARC


def test_branch_point_contracts(fig2_eq_branch, fig2_params):
    pts = fig2_eq_branch.points
    assert len(pts) > 30
    for pt in pts[:: max(1, len(pts) // 50)]:
        p_at = fig2_params.with_(b=pt.param)
        if pt.x > 1e-3 * p_at.k:
            f = model.rhs((pt.x, pt.y), p_at)
        else:
            f = model.rhs_rescaled((pt.x, pt.y), p_at)
        assert np.abs(f).max() < 1e-7 * max(p_at.r, p_at.s) * p_at.k
        tf, th, tt = ct.test_functions(pt)
        assert all(math.isfinite(v) for v in (tf, th, tt))
        assert tf == pt.det and th == pt.tr and tt == pt.x


def test_refined_points_satisfy_definitions(fig2_eq_branch, fig2_params):
    for sp in fig2_eq_branch.specials:
        p_at = fig2_params.with_(b=sp.param)
        if sp.kind is SpecialKind.FOLD:
            J = model.jacobian((sp.x, sp.y), p_at)
            assert abs(np.linalg.det(J)) <= 1e-8 * max(p_at.r, p_at.s) ** 2
            # F' changes sign across the fold
            assert eq.Fprime_eval(p_at.with_(b=sp.param - 1e-4), sp.x) * \
                eq.Fprime_eval(p_at.with_(b=sp.param + 1e-4), sp.x) < 0
        elif sp.kind is SpecialKind.HOPF:
            J = model.jacobian((sp.x, sp.y), p_at)
            assert abs(np.trace(J)) <= 1e-8
            assert np.linalg.det(J) > 0
        elif sp.kind is SpecialKind.TRANSCRITICAL:
            assert abs(sp.x) <= 1e-8 * p_at.k


def test_direction_reversal_reproduces_specials(fig2_params):
    e = eq.positive_equilibria(fig2_params)[0]
    b1 = ct.continue_equilibrium(fig2_params, e, "b", (0.05, 1.2), compute_l1=False)
    p_right = fig2_params.with_(b=1.1)
    e2 = eq.positive_equilibria(p_right)[0]
    b2 = ct.continue_equilibrium(p_right, e2, "b", (0.05, 1.2), compute_l1=False)
    k1 = sorted((s.kind.value, s.param) for s in b1.specials)
    k2 = sorted((s.kind.value, s.param) for s in b2.specials)
    assert [k for k, _ in k1] == [k for k, _ in k2]
    for (ka, va), (kb, vb) in zip(k1, k2):
        assert abs(va - vb) <= 1e-8 * 1.15


def test_boundary_branch_fold_in_m():
    p = Params(r=1.0, b=0.5, k=1.5, m=0.3, a=1.0, c=0.0, n=1.0, q=1.0, s=0.3)
    bes = eq.boundary_equilibria(p)
    e = bes[-1]
    br = ct.continue_equilibrium(p, e, "m", (0.05, 0.9), compute_l1=False)
    folds = _specials(br, SpecialKind.FOLD)
    assert len(folds) == 1
    m_star = p.r * (p.b + p.k) ** 2 / (4 * p.k)
    assert folds[0].param == pytest.approx(m_star, rel=1e-8)
    assert folds[0].x == pytest.approx((p.k - p.b) / 2, rel=1e-6)
    assert folds[0].y == pytest.approx(0.0, abs=1e-12)


def test_singular_start_raises(fig2_params):
    with pytest.raises(SingularJacobianAtStart):
        ct.continue_equilibrium(fig2_params, eq.Equilibrium(x=3.0, y=1.0), "b",
                                (0.05, 1.2))


def test_determinism(fig2_params):
    e = eq.positive_equilibria(fig2_params)[0]
    a = ct.continue_equilibrium(fig2_params, e, "b", (0.3, 0.6), compute_l1=False)
    b = ct.continue_equilibrium(fig2_params, e, "b", (0.3, 0.6), compute_l1=False)
    assert a.params().tolist() == b.params().tolist()
    assert [(s.kind, s.param) for s in a.specials] == [(s.kind, s.param) for s in b.specials]


def test_branch_csv_roundtrip(tmp_path, fig2_eq_branch):
    path = io.write_branch_csv(fig2_eq_branch, tmp_path / "branch.csv",
                               {"config_hash": "deadbeef"})
    text = path.read_text()
    lines = text.splitlines()
    assert lines[0].startswith("# alleelab")
    assert "# config_hash=deadbeef" in lines[1]
    header = lines[2]
    assert header == "param,x,y,det,tr,test_fold,test_hopf,test_tc,stable"
    assert len(lines) == 3 + len(fig2_eq_branch.points)
    sidecar = (tmp_path / "branch.csv.specials.txt").read_text()
    for sp in fig2_eq_branch.specials:
        assert f"kind={sp.kind.value}" in sidecar
    # deterministic bytes
    path2 = io.write_branch_csv(fig2_eq_branch, tmp_path / "branch2.csv",
                                {"config_hash": "deadbeef"})
    assert path.read_text() == path2.read_text().replace("branch2", "branch")


def test_switch_to_cycle_seed_properties(fig2_eq_branch, fig2_params):
    hopfs = sorted(_specials(fig2_eq_branch, SpecialKind.HOPF), key=lambda s: s.param)
    hb2 = hopfs[-1]
    seed = ct.switch_to_cycle(fig2_eq_branch, hb2, fig2_params, eps=1e-3)
    T_lin = 2 * math.pi / hb2.diagnostics["omega"]
    assert abs(seed.period - T_lin) / T_lin < 0.05
    assert seed.floquet_mod <= 1.0 + 1e-6   # supercritical: stable seed
    assert abs(seed.param - hb2.param) < 1e-4
