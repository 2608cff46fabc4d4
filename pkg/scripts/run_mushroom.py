"""Reference one-parameter study: equilibrium branch and cycle mushroom in b.

Writes branch/cycle CSVs plus a ready-to-render figplot spec under
out/mushroom/.
"""

from pathlib import Path

from alleelab import cli

OUT = Path("out/mushroom")


def main():
    cfg = Path(__file__).parent / "fig2.cfg"
    rc = cli.main(["continue-cycle", "--params", str(cfg), "--in", "b",
                   "--range", "0.05:1.2", "--out", str(OUT)])
    if rc != 0:
        raise SystemExit(rc)
    (OUT / "fig2_style.spec").write_text(
        "figure.kind = branch\n"
        "figure.out = fig2_style\n"
        "figure.formats = png,svg\n"
        "axes.x = param\naxes.y = x\naxes.xlabel = b\n"
        "input.branch = branch.csv\n"
        "input.cycles = cycles.csv\n")
    print(OUT / "fig2_style.spec")


if __name__ == "__main__":
    main()
