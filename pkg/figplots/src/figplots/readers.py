"""Parsers for the alleelab CSV/sidecar file contract.

Files carry '#'-prefixed metadata lines, a header row, then comma-separated
values.  Sidecars list one special point per line as space-separated
key=value tokens.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class Table:
    meta: dict
    columns: dict

    def __getitem__(self, key):
        return self.columns[key]

    def __contains__(self, key):
        return key in self.columns


@dataclass
class SpecialPoint:
    kind: str
    values: dict = field(default_factory=dict)


def read_csv(path) -> Table:
    path = Path(path)
    meta = {}
    header = None
    rows = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        if raw.startswith("#"):
            body = raw[1:].strip()
            if "=" in body:
                k, _, v = body.partition("=")
                meta[k.strip()] = v.strip()
            else:
                meta.setdefault("tool", body)
            continue
        if not raw.strip():
            continue
        if header is None:
            header = [c.strip() for c in raw.split(",")]
            continue
        rows.append(raw.split(","))
    if header is None:
        raise ValueError(f"{path}: no header row")
    cols = {}
    for j, name in enumerate(header):
        vals = []
        for r in rows:
            cell = r[j].strip() if j < len(r) else ""
            try:
                vals.append(float(cell) if cell else np.nan)
            except ValueError:
                vals.append(cell)
        if vals and isinstance(vals[0], str):
            cols[name] = np.array(vals, dtype=object)
        else:
            cols[name] = np.array(vals, dtype=float)
    return Table(meta=meta, columns=cols)


def read_specials(path) -> list:
    path = Path(path)
    if not path.exists():
        return []
    out = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        if raw.startswith("#") or not raw.strip():
            continue
        vals = {}
        kind = ""
        for token in raw.split():
            k, _, v = token.partition("=")
            if k == "kind":
                kind = v
            else:
                try:
                    vals[k] = float(v)
                except ValueError:
                    vals[k] = v
        out.append(SpecialPoint(kind=kind, values=vals))
    return out


def sidecar_of(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_suffix(p.suffix + ".specials.txt")


def read_region_map(path) -> list:
    """Region lines: ``region=<label> sample=<p1>,<p2> signature=<text>``."""
    path = Path(path)
    out = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        if raw.startswith("#") or not raw.strip():
            continue
        entry = {}
        for token in raw.split():
            k, _, v = token.partition("=")
            entry[k] = v
        if "sample" in entry:
            a, _, b = entry["sample"].partition(",")
            entry["sample"] = (float(a), float(b))
        out.append(entry)
    return out
