"""Figure rendering: pure file-to-file, deterministic output bytes.

Stable segments are drawn solid and unstable dashed; cycle branches appear
as min/max amplitude envelopes; two-parameter maps use the fixed curve-kind
colors (fold blue, Hopf red, homoclinic green, SNL black) plus the grey
Allee boundary line.  SVG/PNG metadata that would embed timestamps is
suppressed and the SVG hash salt pinned, so identical inputs give identical
bytes.
"""

from __future__ import annotations

import sys
import warnings
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .readers import read_csv, read_region_map, read_specials, sidecar_of
from .spec import CURVE_COLORS, MARKERS, FigureSpec

plt.rcParams["svg.hashsalt"] = "figplots"


def _stability_runs(flags):
    """Split indices into maximal runs of constant stability flag."""
    runs = []
    start = 0
    for i in range(1, len(flags) + 1):
        if i == len(flags) or flags[i] != flags[start]:
            runs.append((start, i, bool(flags[start])))
            start = i
    return runs


def _plot_segments(ax, xv, yv, flags, color, label=None):
    first = True
    for i0, i1, stable in _stability_runs(list(flags)):
        hi = min(i1 + 1, len(xv))
        ax.plot(xv[i0:hi], yv[i0:hi], color=color,
                linestyle="-" if stable else "--",
                linewidth=1.4 if stable else 1.0,
                label=label if first else None)
        first = False


def plot_branch(spec: FigureSpec, out_dir=None) -> list:
    """Bifurcation diagram: equilibrium branch plus cycle envelopes."""
    out_dir = Path(out_dir) if out_dir else spec.base_dir
    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    ycol = spec.y
    if spec.branch:
        tab = read_csv(spec.branch)
        flags = tab["stable"] > 0.5
        _plot_segments(ax, tab[spec.x], tab[ycol], flags, "black", "equilibria")
        for sp in read_specials(sidecar_of(spec.branch)):
            _mark(ax, sp, spec.x, ycol)
    for cyc_path in spec.cycles:
        tab = read_csv(cyc_path)
        flags = tab["stable"] > 0.5
        for env in (f"{ycol}_min", f"{ycol}_max"):
            if env in tab:
                _plot_segments(ax, tab[spec.x], tab[env], flags, "tab:green",
                               "cycles" if env.endswith("max") else None)
        for sp in read_specials(sidecar_of(cyc_path)):
            _mark(ax, sp, spec.x, ycol, cycle=True)
    _finish(ax, spec)
    return _save(fig, spec, out_dir)


def plot_twopar(spec: FigureSpec, out_dir=None) -> list:
    """Two-parameter map with codim-2 markers and optional region labels."""
    out_dir = Path(out_dir) if out_dir else spec.base_dir
    fig, ax = plt.subplots(figsize=(6.4, 5.2))
    names = None
    for path in spec.curves:
        tab = read_csv(path)
        kind = tab.meta.get("curve_kind", "FoldCurve")
        cols = [c for c in tab.columns if c not in ("x", "y")]
        if names is None and len(cols) >= 2:
            names = cols[:2]
        color = CURVE_COLORS.get(kind, "0.3")
        ax.plot(tab[names[0]], tab[names[1]], color=color, linewidth=1.4,
                label=kind)
        for sp in read_specials(sidecar_of(path)):
            if sp.kind in MARKERS and names[0] in sp.values:
                mk, mc = MARKERS[sp.kind]
                ax.plot([sp.values[names[0]]], [sp.values[names[1]]], mk,
                        color=mc, markersize=9, markeredgecolor="white",
                        zorder=5)
                ax.annotate(sp.kind, (sp.values[names[0]], sp.values[names[1]]),
                            textcoords="offset points", xytext=(5, 5), fontsize=8)
    if names and spec.allee_r is not None:
        # grey strong/weak Allee boundary m = b r in a (b, m) map
        xs = np.array(ax.get_xlim())
        ax.plot(xs, spec.allee_r * xs, color="0.6", linewidth=1.0,
                linestyle="-", label="m = b r")
    if spec.regionmap is not None:
        if Path(spec.regionmap).exists():
            for entry in read_region_map(spec.regionmap):
                if "sample" in entry:
                    bx, by = entry["sample"]
                    ax.annotate(entry.get("region", "?"), (bx, by), fontsize=11,
                                ha="center", color="0.25")
        else:
            warnings.warn(f"region map {spec.regionmap} missing; "
                          "rendering curves only", stacklevel=2)
    if names:
        ax.set_xlabel(spec.xlabel or names[0])
        ax.set_ylabel(spec.ylabel or names[1])
    ax.legend(loc="best", fontsize=8)
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    return _save(fig, spec, out_dir)


def _mark(ax, sp, xkey, ycol, cycle=False):
    if sp.kind not in MARKERS:
        return
    mk, mc = MARKERS[sp.kind]
    xv = sp.values.get("param")
    if xv is None:
        return
    if cycle:
        ys = [sp.values.get(f"{ycol}_min"), sp.values.get(f"{ycol}_max")]
        ys = [y for y in ys if y is not None]
    else:
        ys = [sp.values.get(ycol if ycol in sp.values else "x")]
    for y in ys:
        if y is None:
            continue
        ax.plot([xv], [y], mk, color=mc, markersize=8, markeredgecolor="white",
                zorder=5)
    if ys and ys[0] is not None:
        ax.annotate(sp.kind, (xv, ys[-1]), textcoords="offset points",
                    xytext=(4, 4), fontsize=8)


def _finish(ax, spec):
    ax.set_xlabel(spec.xlabel or spec.x)
    ax.set_ylabel(spec.ylabel or spec.y)
    if spec.title:
        ax.set_title(spec.title)
    handles, labels = ax.get_legend_handles_labels()
    if handles:
        ax.legend(loc="best", fontsize=8)
    ax.figure.tight_layout()


def _save(fig, spec: FigureSpec, out_dir: Path) -> list:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for ext in spec.formats:
        ext = ext.strip().lstrip(".")
        path = out_dir / f"{spec.out}.{ext}"
        metadata = None
        if ext == "svg":
            metadata = {"Date": None}
        elif ext == "png":
            metadata = {"Software": "figplots"}
        elif ext == "pdf":
            metadata = {"CreationDate": None}
        fig.savefig(path, dpi=150, metadata=metadata)
        written.append(path)
    plt.close(fig)
    return written


def render(spec: FigureSpec, out_dir=None) -> list:
    if spec.kind == "branch":
        return plot_branch(spec, out_dir)
    if spec.kind == "twopar":
        return plot_twopar(spec, out_dir)
    raise ValueError(f"unknown figure kind {spec.kind!r}")
