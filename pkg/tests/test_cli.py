"""Batch driver: exit codes, file formats, determinism."""

import json
from pathlib import Path

import pytest

from alleelab.cli import main

from conftest import FIG2_KW


@pytest.fixture()
def fig2_cfg(tmp_path):
    cfg = tmp_path / "fig2.cfg"
    lines = [f"model.{k} = {v}" for k, v in dict(FIG2_KW, b=0.5).items()]
    cfg.write_text("\n".join(lines) + "\n")
    return cfg


def test_equilibria_csv_and_json(fig2_cfg, tmp_path):
    out = tmp_path / "o1"
    rc = main(["equilibria", "--params", str(fig2_cfg), "--b", "0.5",
               "--json", "--out", str(out)])
    assert rc == 0
    text = (out / "equilibria.csv").read_text()
    assert text.startswith("# alleelab")
    assert "config_hash=" in text
    assert "StableFocus" in text and "Saddle" in text
    payload = json.loads((out / "equilibria.json").read_text())
    kinds = {row["kind"] for row in payload}
    assert {"StableFocus", "Saddle"} <= kinds
    assert (out / "effective.cfg").exists()


def test_infeasible_params_exit_2(fig2_cfg, tmp_path, capsys):
    rc = main(["equilibria", "--params", str(fig2_cfg), "--c", "-3.7",
               "--out", str(tmp_path / "bad")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "c" in err and "sqrt" in err


def test_simulate_axis_invariance(fig2_cfg, tmp_path):
    out = tmp_path / "sim"
    rc = main(["simulate", "--params", str(fig2_cfg), "--x0", "1.0", "--y0", "0.0",
               "--tmax", "50", "--points", "101", "--out", str(out)])
    assert rc == 0
    rows = [l for l in (out / "orbit.csv").read_text().splitlines()
            if not l.startswith("#")][1:]
    ys = [float(r.split(",")[2]) for r in rows]
    assert all(y == 0.0 for y in ys)


def test_simulate_origin_attractor(fig2_cfg, tmp_path):
    out = tmp_path / "sim0"
    rc = main(["simulate", "--params", str(fig2_cfg), "--m", "0.3", "--b", "0.5",
               "--x0", "0.2", "--y0", "0.2", "--tmax", "3000", "--rescaled",
               "--out", str(out)])
    assert rc == 0
    rows = [l for l in (out / "orbit.csv").read_text().splitlines()
            if not l.startswith("#")][1:]
    x_last = float(rows[-1].split(",")[1])
    assert x_last < 2e-2


def test_continue_eq_outputs(fig2_cfg, tmp_path):
    out = tmp_path / "ceq"
    rc = main(["continue-eq", "--params", str(fig2_cfg), "--in", "b",
               "--range", "0.05:1.2", "--out", str(out)])
    assert rc == 0
    side = (out / "branch.csv.specials.txt").read_text()
    assert side.count("kind=Hopf") == 2
    assert "kind=Transcritical" in side and "kind=Fold" in side


def test_determinism_bitwise(fig2_cfg, tmp_path):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        rc = main(["continue-eq", "--params", str(fig2_cfg), "--in", "b",
                   "--range", "0.3:0.6", "--out", str(out)])
        assert rc == 0
        outs.append((out / "branch.csv").read_bytes())
    assert outs[0] == outs[1]


def test_classify_origin_output(fig2_cfg, tmp_path):
    out = tmp_path / "orig"
    rc = main(["classify-origin", "--params", str(fig2_cfg), "--m", "0.3",
               "--out", str(out)])
    assert rc == 0
    text = (out / "origin.txt").read_text()
    assert "region=I_Attractor" in text


def test_degeneracy_subcommand(fig2_cfg, tmp_path):
    out = tmp_path / "deg"
    rc = main(["degeneracy", "--params", str(fig2_cfg), "--x", "1.0",
               "--test", "cusp", "--out", str(out)])
    assert rc == 0
    assert "cusp_verdict" in (out / "degeneracy.txt").read_text()


@pytest.mark.slow
def test_continue_cycle_mushroom(fig2_cfg, tmp_path):
    out = tmp_path / "cyc"
    rc = main(["continue-cycle", "--params", str(fig2_cfg), "--in", "b",
               "--range", "0.05:1.2", "--out", str(out)])
    assert rc == 0
    assert (out / "topology.txt").read_text().strip() == "Mushroom"
    side = (out / "cycles.csv.specials.txt").read_text()
    assert side.count("kind=SNL") == 4
