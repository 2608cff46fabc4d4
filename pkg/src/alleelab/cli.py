"""Batch command-line driver.

Every analysis is a subcommand with file-based, reproducible input/output:
the fully-resolved effective config is written next to the outputs, and all
CSV files carry '#'-metadata headers (tool version, config hash).  Exit
codes: 0 success, 2 domain/validation errors, 3 numerical failures.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, io, sim
from . import continuation as ct
from . import cycles as cy
from . import equilibria, isolas, studies, twopar
from .errors import AlleeLabError, BoundaryCase, DomainError
from .model import PARAM_NAMES, Params

EXIT_DOMAIN = 2
EXIT_NUMERIC = 3


def _add_param_flags(sp):
    sp.add_argument("--params", required=True, help="model config file")
    for name in PARAM_NAMES:
        sp.add_argument(f"--{name}", type=float, default=None,
                        help=f"override model.{name}")
    sp.add_argument("--out", default="out", help="output directory")
    sp.add_argument("--tag", default=None, help="output subdirectory tag")


def _resolve(args, extra: dict) -> tuple:
    cfg = io.read_config(args.params)
    overrides = {name: getattr(args, name) for name in PARAM_NAMES}
    p = io.params_from_config(cfg, overrides)
    eff = io.params_to_config(p)
    eff.update({f"run.{k}": v for k, v in extra.items()})
    outdir = Path(args.out)
    if args.tag:
        outdir = outdir / args.tag
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "effective.cfg").write_text(io.dumps_config(eff), encoding="utf-8")
    meta = {"config_hash": io.config_hash(eff)}
    return p, outdir, meta


def _range_pair(text: str) -> tuple:
    lo, _, hi = text.partition(":")
    return float(lo), float(hi)


def cmd_equilibria(args) -> int:
    p, outdir, meta = _resolve(args, {"command": "equilibria", "tol": args.tol or ""})
    rows = equilibria.boundary_equilibria(p)
    pos = equilibria.positive_equilibria(p, tol=args.tol)
    classified = []
    for e in pos:
        try:
            classified.append(equilibria.classify(p, e))
        except AlleeLabError:
            classified.append(e)
    all_rows = rows + classified
    if args.json:
        payload = [{"x": e.x, "y": e.y, "multiplicity": e.multiplicity,
                    "kind": e.kind.value} for e in all_rows]
        (outdir / "equilibria.json").write_text(json.dumps(payload, indent=1) + "\n")
    io.write_equilibria_csv(all_rows, outdir / "equilibria.csv", meta)
    print(outdir / "equilibria.csv")
    return 0


def cmd_classify_origin(args) -> int:
    p, outdir, meta = _resolve(args, {"command": "classify-origin"})
    try:
        oc = equilibria.classify_origin(p)
    except BoundaryCase as ex:
        print(f"boundary case: {ex}", file=sys.stderr)
        return EXIT_DOMAIN
    lines = [f"region={oc.region.value}"]
    if oc.v_star is not None:
        lines.append(f"v_star={io.fmt(oc.v_star)}")
    for key, pair in sorted(oc.blowup_eigs.items()):
        lines.append(f"eigs.{key}={io.fmt(pair[0])},{io.fmt(pair[1])}")
    (outdir / "origin.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(outdir / "origin.txt")
    return 0


def cmd_simulate(args) -> int:
    p, outdir, meta = _resolve(args, {
        "command": "simulate", "x0": args.x0, "y0": args.y0, "tmax": args.tmax,
        "rescaled": args.rescaled, "x_floor": args.x_floor or ""})
    t_eval = np.linspace(0.0, args.tmax, args.points) if args.points else None
    orb = sim.orbit(p, (args.x0, args.y0), (0.0, args.tmax), rescaled=args.rescaled,
                    x_floor=args.x_floor, t_eval=t_eval)
    io.write_orbit_csv(orb, outdir / "orbit.csv", meta)
    print(outdir / "orbit.csv")
    return 0


def cmd_continue_eq(args) -> int:
    p, outdir, meta = _resolve(args, {
        "command": "continue-eq", "in": args.in_param, "range": args.range})
    prange = _range_pair(args.range)
    br = studies.equilibrium_branch(p, args.in_param, prange)
    io.write_branch_csv(br, outdir / "branch.csv", meta)
    print(outdir / "branch.csv")
    return 0


def cmd_continue_cycle(args) -> int:
    p, outdir, meta = _resolve(args, {
        "command": "continue-cycle", "in": args.in_param, "range": args.range,
        "ntst": args.ntst})
    prange = _range_pair(args.range)
    opts = cy.CycleOptions(ntst=args.ntst)
    eq_br = studies.equilibrium_branch(p, args.in_param, prange)
    cbr = studies.cycle_branch_from_hopf(p, eq_br, prange=prange, opts=opts)
    io.write_cycle_branch_csv(cbr, outdir / "cycles.csv", meta)
    io.write_branch_csv(eq_br, outdir / "branch.csv", meta)
    topo = cy.classify_branch_topology(cbr)
    (outdir / "topology.txt").write_text(topo + "\n", encoding="utf-8")
    print(outdir / "cycles.csv")
    return 0


def cmd_continue_2par(args) -> int:
    p, outdir, meta = _resolve(args, {
        "command": "continue-2par", "p1": args.p1, "p2": args.p2,
        "range1": args.range1, "range2": args.range2, "snl": args.snl,
        "slice_range": args.slice_range})
    ranges = (_range_pair(args.range1), _range_pair(args.range2))
    slice_range = _range_pair(args.slice_range) if args.slice_range else ranges[0]
    study = studies.plane_study(p, args.p1, args.p2, ranges, slice_range,
                                with_snl=args.snl)
    for curve in study.curves:
        io.write_curve_csv(curve, outdir / f"{curve.kind.lower()}.csv", meta)
    summary = {
        "bt": study.bt_points, "gh": study.gh_points, "cpl": study.cpl_points,
        "cusp": study.cusp_points,
        "snl_param_folds": study.snl_param_folds,
        "hopf_param_folds": study.hopf_param_folds,
    }
    (outdir / "codim2.json").write_text(json.dumps(summary, indent=1, default=float) + "\n")
    print(outdir / "codim2.json")
    return 0


def cmd_scan_isolas(args) -> int:
    p, outdir, meta = _resolve(args, {
        "command": "scan-isolas", "in": args.in_param, "range": args.range,
        "over": args.over, "values": args.values})
    prange = _range_pair(args.range)
    values = [float(v) for v in args.values.split(",")]
    res = isolas.isola_scan(p, args.in_param, prange, args.over, values)
    lines = [f"{args.over},topology,folds"]
    for v in values:
        lines.append(f"{io.fmt(v)},{res.topologies.get(v, 'none')},{res.fold_counts.get(v, 0)}")
    (outdir / "isola_scan.csv").write_text(
        "\n".join(io._meta_lines(meta) + lines) + "\n", encoding="utf-8")
    for v, cbr in res.branches.items():
        io.write_cycle_branch_csv(cbr, outdir / f"cycles_{args.over}_{io.fmt(v)}.csv", meta)
    print(outdir / "isola_scan.csv")
    return 0


def cmd_degeneracy(args) -> int:
    from . import normal_forms as nf
    p, outdir, meta = _resolve(args, {"command": "degeneracy", "x": args.x,
                                      "test": args.test})
    lines = []
    if args.test in ("cusp", "all"):
        try:
            rep = nf.saddle_node_cusp_test(p, args.x)
            lines.append(f"cusp_verdict={rep.verdict.value}")
            for name in ("F", "Fprime", "Fsecond", "p", "pprime",
                         "b_minus", "b_plus"):
                lines.append(f"{name}={io.fmt(getattr(rep, name))}")
        except AlleeLabError as ex:
            lines.append(f"cusp_verdict=error:{type(ex).__name__}")
    if args.test in ("hopf", "all"):
        try:
            rep = nf.lyapunov1(p, args.x)
            lines.append(f"eta11={io.fmt(rep.eta11)}")
            lines.append(f"eta1_sign={rep.eta1_sign}")
            lines.append(f"l1_numeric={io.fmt(rep.l1_numeric)}")
            lines.append(f"omega={io.fmt(rep.omega)}")
        except AlleeLabError as ex:
            lines.append(f"hopf=error:{type(ex).__name__}")
    (outdir / "degeneracy.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(outdir / "degeneracy.txt")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="alleelab",
                                 description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("equilibria", help="boundary and positive equilibria")
    _add_param_flags(sp)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(fn=cmd_equilibria)

    sp = sub.add_parser("classify-origin", help="blow-up sector structure at the origin")
    _add_param_flags(sp)
    sp.set_defaults(fn=cmd_classify_origin)

    sp = sub.add_parser("simulate", help="adaptive RK45 orbit")
    _add_param_flags(sp)
    sp.add_argument("--x0", type=float, required=True)
    sp.add_argument("--y0", type=float, required=True)
    sp.add_argument("--tmax", type=float, required=True)
    sp.add_argument("--points", type=int, default=None)
    sp.add_argument("--rescaled", action="store_true")
    sp.add_argument("--x-floor", dest="x_floor", type=float, default=None)
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("continue-eq", help="equilibrium branch in one parameter")
    _add_param_flags(sp)
    sp.add_argument("--in", dest="in_param", required=True, choices=PARAM_NAMES)
    sp.add_argument("--range", required=True, help="lo:hi")
    sp.set_defaults(fn=cmd_continue_eq)

    sp = sub.add_parser("continue-cycle", help="cycle branch from a Hopf point")
    _add_param_flags(sp)
    sp.add_argument("--in", dest="in_param", required=True, choices=PARAM_NAMES)
    sp.add_argument("--range", required=True, help="lo:hi")
    sp.add_argument("--ntst", type=int, default=cy.NTST_DEFAULT)
    sp.set_defaults(fn=cmd_continue_cycle)

    sp = sub.add_parser("continue-2par", help="fold/Hopf (+SNL) curves in two parameters")
    _add_param_flags(sp)
    sp.add_argument("--p1", required=True, choices=PARAM_NAMES)
    sp.add_argument("--p2", required=True, choices=PARAM_NAMES)
    sp.add_argument("--range1", required=True, help="lo:hi for p1")
    sp.add_argument("--range2", required=True, help="lo:hi for p2")
    sp.add_argument("--slice-range", dest="slice_range", default=None,
                    help="p1 window of the seeding slice")
    sp.add_argument("--snl", action="store_true", help="also trace the SNL curve")
    sp.set_defaults(fn=cmd_continue_2par)

    sp = sub.add_parser("scan-isolas", help="branch topology over a parameter list")
    _add_param_flags(sp)
    sp.add_argument("--in", dest="in_param", required=True, choices=PARAM_NAMES)
    sp.add_argument("--range", required=True, help="lo:hi")
    sp.add_argument("--over", required=True, choices=PARAM_NAMES)
    sp.add_argument("--values", required=True, help="comma-separated list")
    sp.set_defaults(fn=cmd_scan_isolas)

    sp = sub.add_parser("degeneracy", help="normal-form tests at a point")
    _add_param_flags(sp)
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--test", choices=("cusp", "hopf", "all"), default="all")
    sp.set_defaults(fn=cmd_degeneracy)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (DomainError, BoundaryCase) as ex:
        print(f"domain error: {ex}", file=sys.stderr)
        return EXIT_DOMAIN
    except AlleeLabError as ex:
        print(f"numerical failure: {type(ex).__name__}: {ex}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
