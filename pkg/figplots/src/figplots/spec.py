"""Figure specification files: flat key-value text with dotted namespaces.

Example::

    figure.kind = branch
    figure.out = fig2
    figure.formats = png,svg
    axes.x = param
    axes.y = x
    axes.xlabel = b
    input.branch = branch.csv
    input.cycles = cycles.csv

Two-parameter maps use ``figure.kind = twopar`` with ``input.curve.<i>``
entries and an optional ``input.regionmap``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

# curve-kind styling convention: SN blue, H red, Hom green, SNL black
CURVE_COLORS = {
    "FoldCurve": "tab:blue",
    "HopfCurve": "tab:red",
    "HomApproxCurve": "tab:green",
    "SNLCurve": "black",
    "AlleeBoundary": "0.6",
}

MARKERS = {
    "Hopf": ("o", "tab:red"),
    "Fold": ("s", "tab:blue"),
    "Transcritical": ("^", "tab:purple"),
    "SNL": ("d", "black"),
    "BT": ("*", "tab:blue"),
    "GH": ("P", "tab:red"),
    "CuspEq": ("X", "tab:blue"),
    "CPL": ("X", "black"),
    "HomApprox": ("v", "tab:green"),
}


@dataclass
class FigureSpec:
    kind: str
    out: str
    formats: tuple = ("png", "svg")
    x: str = "param"
    y: str = "x"
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""
    branch: Path | None = None
    cycles: list = field(default_factory=list)
    curves: list = field(default_factory=list)
    regionmap: Path | None = None
    allee_r: float | None = None
    base_dir: Path = Path(".")


def parse_spec(path) -> FigureSpec:
    path = Path(path)
    kv = {}
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        k, _, v = line.partition("=")
        kv[k.strip()] = v.strip()
    base = path.parent
    kind = kv.get("figure.kind", "branch")
    spec = FigureSpec(
        kind=kind,
        out=kv.get("figure.out", path.stem),
        formats=tuple(kv.get("figure.formats", "png,svg").split(",")),
        x=kv.get("axes.x", "param"),
        y=kv.get("axes.y", "x"),
        xlabel=kv.get("axes.xlabel", ""),
        ylabel=kv.get("axes.ylabel", ""),
        title=kv.get("figure.title", ""),
        base_dir=base,
    )
    if "input.branch" in kv:
        spec.branch = base / kv["input.branch"]
    for key in sorted(kv):
        if key == "input.cycles" or key.startswith("input.cycles."):
            spec.cycles.append(base / kv[key])
        if key.startswith("input.curve"):
            spec.curves.append(base / kv[key])
    if "input.regionmap" in kv:
        spec.regionmap = base / kv["input.regionmap"]
    if "style.allee_r" in kv:
        spec.allee_r = float(kv["style.allee_r"])
    missing = [p for p in ([spec.branch] if spec.branch else []) + spec.cycles + spec.curves
               if not Path(p).exists()]
    if missing:
        raise FileNotFoundError(f"missing inputs: {', '.join(str(m) for m in missing)}")
    return spec
