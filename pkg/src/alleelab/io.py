"""File formats: flat key-value configs and CSV emissions with sidecars.

All outputs are UTF-8 CSV with '#'-prefixed metadata lines (tool version and
the hash of the effective config), formatted with repr-roundtrip precision so
identical runs produce identical bytes.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from . import __version__
from .continuation import Branch, SpecialPoint
from .cycles import CycleBranch
from .model import PARAM_NAMES, Params


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


# -- flat key-value config ----------------------------------------------------

def dumps_config(cfg: dict) -> str:
    lines = []
    for key in sorted(cfg):
        v = cfg[key]
        if isinstance(v, (list, tuple)):
            v = ",".join(fmt(x) if not isinstance(x, str) else x for x in v)
        elif isinstance(v, float):
            v = fmt(v)
        lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"


def loads_config(text: str) -> dict:
    out = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition("=")
        out[key.strip()] = val.strip()
    return out


def read_config(path) -> dict:
    return loads_config(Path(path).read_text(encoding="utf-8"))


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(dumps_config(cfg).encode()).hexdigest()[:16]


def params_from_config(cfg: dict, overrides: dict | None = None) -> Params:
    kw = {}
    for name in PARAM_NAMES:
        key = f"model.{name}"
        if key in cfg:
            kw[name] = float(cfg[key])
    if overrides:
        kw.update({k: float(v) for k, v in overrides.items() if v is not None})
    return Params(**kw)


def params_to_config(p: Params) -> dict:
    return {f"model.{name}": p.get(name) for name in PARAM_NAMES}


# -- CSV writers ----------------------------------------------------------------

def _meta_lines(meta: dict) -> list:
    lines = [f"# alleelab {__version__}"]
    for k in sorted(meta):
        lines.append(f"# {k}={meta[k]}")
    return lines


def write_branch_csv(branch: Branch, path, meta: dict | None = None) -> Path:
    path = Path(path)
    rows = ["param,x,y,det,tr,test_fold,test_hopf,test_tc,stable"]
    for pt in branch.points:
        rows.append(",".join([fmt(pt.param), fmt(pt.x), fmt(pt.y), fmt(pt.det),
                              fmt(pt.tr), fmt(pt.test_fold), fmt(pt.test_hopf),
                              fmt(pt.test_tc), fmt(pt.stable)]))
    text = "\n".join(_meta_lines(meta or {}) + rows) + "\n"
    path.write_text(text, encoding="utf-8")
    write_specials_sidecar(branch.specials, path.with_suffix(path.suffix + ".specials.txt"),
                           meta)
    return path


def write_specials_sidecar(specials, path, meta: dict | None = None) -> Path:
    path = Path(path)
    lines = _meta_lines(meta or {})
    for sp in specials:
        diag = " ".join(f"{k}={fmt(v) if isinstance(v, (int, float, np.floating)) else v}"
                        for k, v in sorted(sp.diagnostics.items()))
        lines.append(f"kind={sp.kind.value} param={fmt(sp.param)} x={fmt(sp.x)} "
                     f"y={fmt(sp.y)} {diag}".rstrip())
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_cycle_branch_csv(cbr: CycleBranch, path, meta: dict | None = None) -> Path:
    path = Path(path)
    rows = ["param,period,x_min,x_max,y_min,y_max,floquet_mod,stable,flag"]
    for c in cbr.cycles:
        a = c.amplitude()
        stable = c.floquet_mod < 1.0
        rows.append(",".join([fmt(c.param), fmt(c.period), fmt(a["x_min"]), fmt(a["x_max"]),
                              fmt(a["y_min"]), fmt(a["y_max"]), fmt(c.floquet_mod),
                              fmt(stable), c.flag]))
    text = "\n".join(_meta_lines(meta or {}) + rows) + "\n"
    path.write_text(text, encoding="utf-8")
    write_specials_sidecar(cbr.specials, path.with_suffix(path.suffix + ".specials.txt"), meta)
    return path


def write_orbit_csv(orbit, path, meta: dict | None = None) -> Path:
    path = Path(path)
    rows = ["t,x,y"]
    for t, x, y in zip(orbit.t, orbit.x, orbit.y):
        rows.append(f"{fmt(t)},{fmt(x)},{fmt(y)}")
    path.write_text("\n".join(_meta_lines(meta or {}) + rows) + "\n", encoding="utf-8")
    return path


def write_curve_csv(curve, path, meta: dict | None = None) -> Path:
    """Two-parameter curve: p1,p2,x,y plus kind-specific aux columns."""
    path = Path(path)
    aux = [k for k in curve.samples[0] if k not in (curve.p1, curve.p2, "x", "y", "end")]
    header = f"{curve.p1},{curve.p2},x,y" + ("," + ",".join(aux) if aux else "")
    rows = [header]
    for s in curve.samples:
        cells = [fmt(s[curve.p1]), fmt(s[curve.p2]), fmt(s.get("x", np.nan)),
                 fmt(s.get("y", np.nan))]
        cells += [fmt(s.get(k, np.nan)) for k in aux]
        rows.append(",".join(cells))
    meta = dict(meta or {})
    meta["curve_kind"] = curve.kind
    path.write_text("\n".join(_meta_lines(meta) + rows) + "\n", encoding="utf-8")
    write_specials_sidecar(curve.codim2, path.with_suffix(path.suffix + ".specials.txt"), meta)
    return path


def write_equilibria_csv(rows, path, meta: dict | None = None) -> Path:
    path = Path(path)
    out = ["x,y,multiplicity,kind"]
    for e in rows:
        out.append(f"{fmt(e.x)},{fmt(e.y)},{e.multiplicity},{e.kind.value}")
    path.write_text("\n".join(_meta_lines(meta or {}) + out) + "\n", encoding="utf-8")
    return path
