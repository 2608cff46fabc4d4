"""Two-parameter curve maps: (b,m) at the Fig-2-style base, (n,b) and (n,m)
at the Fig-6-style base, with codim-2 inventories and figplot specs."""

import json
from pathlib import Path

from alleelab import io, studies
from alleelab.model import Params

OUT = Path("out/twopar")


def run_plane(base, p1, p2, ranges, slice_range, tag, with_snl=True, snl_near=None):
    study = studies.plane_study(base, p1, p2, ranges, slice_range,
                                snl_near=snl_near, with_snl=with_snl)
    out = OUT / tag
    out.mkdir(parents=True, exist_ok=True)
    spec_lines = ["figure.kind = twopar", f"figure.out = {tag}_map",
                  "figure.formats = png,svg"]
    for i, curve in enumerate(study.curves, start=1):
        path = io.write_curve_csv(curve, out / f"{curve.kind.lower()}.csv",
                                  {"plane": f"{p1},{p2}"})
        spec_lines.append(f"input.curve.{i} = {path.name}")
    if (p1, p2) == ("b", "m"):
        spec_lines.append(f"style.allee_r = {base.r}")
    summary = {"bt": study.bt_points, "gh": study.gh_points,
               "cpl": study.cpl_points,
               "snl_param_folds": study.snl_param_folds,
               "hopf_param_folds": study.hopf_param_folds}
    (out / "codim2.json").write_text(json.dumps(summary, indent=1, default=float) + "\n")
    (out / f"{tag}.spec").write_text("\n".join(spec_lines) + "\n")
    print(f"{tag}: BT={len(study.bt_points)} GH={len(study.gh_points)} "
          f"CPL={len(study.cpl_points)}  -> {out}")


def main():
    here = Path(__file__).parent
    fig2 = io.params_from_config(io.read_config(here / "fig2.cfg"))
    fig6 = io.params_from_config(io.read_config(here / "fig6.cfg"))
    run_plane(fig2, "b", "m", ((0.05, 1.3), (0.05, 0.7)), (0.05, 1.2),
              "bm", snl_near=0.3895)
    run_plane(fig6, "n", "b", ((0.2, 12.0), (0.30, 1.2)), (0.2, 12.0), "nb")
    run_plane(fig6.with_(b=0.6), "n", "m", ((0.2, 6.0), (0.30, 0.60)),
              (0.2, 6.0), "nm", with_snl=False)


if __name__ == "__main__":
    main()
