"""Two-parameter curves and codim-2 organizing centers."""

import math

import numpy as np
import pytest

from alleelab import continuation as ct
from alleelab import cycles as cy
from alleelab import equilibria as eq
from alleelab import io, studies, twopar
from alleelab.continuation import SpecialKind
from alleelab.errors import StartNotOnCurve
from alleelab.model import Params

from conftest import FIG2_KW, FIG6_KW


@pytest.fixture(scope="session")
def bm_study(fig2_params):
    return studies.plane_study(
        fig2_params, "b", "m", ((0.05, 1.3), (0.05, 0.7)), (0.05, 1.2),
        snl_near=0.3895)


def test_bm_plane_codim2_inventory(bm_study):
    assert len(bm_study.bt_points) == 1
    assert len(bm_study.gh_points) == 1
    assert len(bm_study.cpl_points) == 1
    (bt_b, bt_m) = bm_study.bt_points[0]
    (gh_b, gh_m) = bm_study.gh_points[0]
    assert 0.34 < bt_b < 0.37 and 0.18 < bt_m < 0.21
    assert 0.38 < gh_b < 0.41 and 0.17 < gh_m < 0.20


def test_bt_points_meet_on_both_curves(bm_study):
    fold_curve = next(c for c in bm_study.curves if c.kind == "FoldCurve")
    hopf_curve = next(c for c in bm_study.curves if c.kind == "HopfCurve")
    bts_f = [s for s in fold_curve.codim2 if s.kind is SpecialKind.BT]
    bts_h = [s for s in hopf_curve.codim2 if s.kind is SpecialKind.BT]
    assert bts_f and bts_h
    for sf in bts_f:
        d = min(math.hypot(sf.diagnostics["b"] - sh.diagnostics["b"],
                           sf.diagnostics["m"] - sh.diagnostics["m"]) for sh in bts_h)
        assert d <= 1e-5


def test_bt_point_is_nondegenerate_double_zero(bm_study, fig2_params):
    fold_curve = next(c for c in bm_study.curves if c.kind == "FoldCurve")
    bt = [s for s in fold_curve.codim2 if s.kind is SpecialKind.BT][0]
    d = bt.diagnostics
    p_at = fig2_params.with_(b=d["b"], m=d["m"])
    import alleelab.model as model
    J = model.jacobian((d["x"], d["y"]), p_at)
    assert abs(np.trace(J)) <= 1e-8
    assert abs(np.linalg.det(J)) <= 1e-8
    assert d.get("bt2_verdict") == "BTdeg2_OK"
    assert abs(d["u1u2u3"]) > 0


def test_gh_l1_changes_sign_along_hopf_curve(bm_study, fig2_params):
    hopf_curve = next(c for c in bm_study.curves if c.kind == "HopfCurve")
    gh = [s for s in hopf_curve.codim2 if s.kind is SpecialKind.GH][0]
    from alleelab import oracle
    d = gh.diagnostics
    assert abs(d["l1"]) <= 1e-6
    # sample the curve on both sides of the GH and compare l1 signs
    bs = hopf_curve.array("b")
    ms = hopf_curve.array("m")
    idx = int(np.argmin((bs - d["b"]) ** 2 + (ms - d["m"]) ** 2))
    signs = []
    for j in (idx - 3, idx + 3):
        if not (0 <= j < len(bs)):
            continue
        p_at = fig2_params.with_(b=bs[j], m=ms[j])
        roots = eq.positive_equilibria(p_at)
        e = min(roots, key=lambda e: abs(e.x - hopf_curve.samples[j]["x"]))
        try:
            _, l1, _ = oracle.lyapunov_coefficients(p_at, e.x, order=3)
            signs.append(np.sign(l1))
        except Exception:
            pass
    assert len(signs) == 2 and signs[0] != signs[1]


def test_snl_curve_ends_at_gh(bm_study):
    snl = next(c for c in bm_study.curves if c.kind == "SNLCurve")
    gh = bm_study.gh_points[0]
    ends = [snl.samples[0], snl.samples[-1]]
    d = min(math.hypot(s["b"] - gh[0], s["m"] - gh[1]) for s in ends)
    assert d <= 1e-3   # endpoint stops at the amplitude floor short of GH
    tagged = [s for s in ends if s.get("end") == "GH"]
    assert tagged


def test_snl_m_fold_matches_isola_window_top(bm_study):
    folds_m = [f for f in bm_study.snl_param_folds if f["fold_of"] == "m"]
    assert folds_m
    m_top = max(f["m"] for f in folds_m)
    assert m_top == pytest.approx(0.228811, abs=2e-3)


def test_mushroom_isola_regions(bm_study, fig2_params):
    rm = studies.isola_mushroom_regions(bm_study, fig2_params)
    m1 = rm.isola["p2_low"]
    # the reference mushroom slice sits below the SNL m-fold, isolas above
    assert 0.2 < m1 < 0.24
    assert rm.mushroom["p2_below"] == m1
    assert rm.isola["p2_gh"] == pytest.approx(bm_study.gh_points[0][1], abs=1e-9)


def test_isola_regions_weak_allee_side(bm_study, fig2_params):
    # the isola window (between the SNL m-fold sheets) sits in the weak-Allee
    # area; representative isola slices have their centre at m < b r (the
    # one-parameter study asserts the same for every traced isola)
    snl = next(c for c in bm_study.curves if c.kind == "SNLCurve")
    r = fig2_params.r
    m_top = max(f["m"] for f in bm_study.snl_param_folds if f["fold_of"] == "m")
    for m_probe in (0.210, 0.220):
        assert m_probe < m_top
        bs = [s["b"] for s in snl.samples if abs(s["m"] - m_probe) < 2e-3]
        assert bs
        b_centre = 0.5 * (min(bs) + max(bs))
        assert m_probe < b_centre * r


def test_region_signatures_across_curves(bm_study, fig2_params):
    # region I (no interior equilibria) vs region just across the fold curve
    bt_b, bt_m = bm_study.bt_points[0]
    p_I = fig2_params.with_(b=0.2, m=0.25)
    sig_I = studies.region_signature(p_I, (0.05, 1.2))
    assert sig_I["interior"] == ()
    assert set(sig_I["boundary"]) == {"UnstableNode", "Saddle"}
    p_II = fig2_params.with_(b=0.36, m=0.185)
    sig_II = studies.region_signature(p_II, (0.05, 1.2))
    assert len(sig_II["interior"]) == 2
    assert sig_II["boundary"] != sig_I["interior"]


def test_start_not_on_curve_raises(fig2_params):
    with pytest.raises(StartNotOnCurve):
        twopar.continue_fold_curve(fig2_params, (2.5, 3.0), "b", "m",
                                   ((0.05, 1.3), (0.05, 0.7)))


def test_curve_csv_format(tmp_path, bm_study):
    snl = next(c for c in bm_study.curves if c.kind == "SNLCurve")
    path = io.write_curve_csv(snl, tmp_path / "snl.csv", {"config_hash": "00"})
    lines = path.read_text().splitlines()
    assert any(l.startswith("# curve_kind=SNLCurve") for l in lines[:4])
    header = next(l for l in lines if not l.startswith("#"))
    assert header.startswith("b,m,x,y")
    sidecar = (tmp_path / "snl.csv.specials.txt").read_text()
    assert "kind=CPL" in sidecar
