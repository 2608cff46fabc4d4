"""Nested-isola scan over m at the reference parameters, plus window edges."""

from pathlib import Path

from alleelab import cycles as cy
from alleelab import io, isolas
from alleelab.model import Params

OUT = Path("out/isolas")
M_VALUES = [0.201387, 0.204370, 0.214270, 0.226336]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    cfg = io.read_config(Path(__file__).parent / "fig2.cfg")
    p = io.params_from_config(cfg)
    res = isolas.isola_scan(p, "b", (0.05, 1.2), "m", M_VALUES)
    lines = ["m,topology,folds"]
    for v in M_VALUES:
        lines.append(f"{io.fmt(v)},{res.topologies.get(v, 'none')},{res.fold_counts.get(v, 0)}")
        if v in res.branches:
            io.write_cycle_branch_csv(res.branches[v], OUT / f"isola_m_{io.fmt(v)}.csv",
                                      {"m": io.fmt(v)})
    carrier = isolas.carrier_of(res.branches[M_VALUES[-1]])
    hi = isolas.isola_window_edge(carrier, "b", (0.05, 1.2), "m",
                                  M_VALUES[-1], 0.234, lo_closed=True, tol=5e-4)
    lo = isolas.isola_window_edge(isolas.carrier_of(res.branches[M_VALUES[1]]),
                                  "b", (0.05, 1.2), "m", 0.198, M_VALUES[1],
                                  lo_closed=False, tol=5e-4)
    lines.append(f"# closed-branch window in m: [{lo:.6f}, {hi:.6f}]")
    (OUT / "scan.csv").write_text("\n".join(lines) + "\n")
    print(OUT / "scan.csv")
    print(f"isola window: [{lo:.6f}, {hi:.6f}]")


if __name__ == "__main__":
    main()
