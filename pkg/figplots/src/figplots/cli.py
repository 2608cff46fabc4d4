"""figplot <spec-file> [--out-dir DIR]"""

from __future__ import annotations

import argparse
import sys

from .render import render
from .spec import parse_spec


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="figplot", description=__doc__)
    ap.add_argument("specfile", help="figure spec (flat key-value text)")
    ap.add_argument("--out-dir", default=None, help="output directory")
    args = ap.parse_args(argv)
    try:
        spec = parse_spec(args.specfile)
    except (OSError, ValueError, FileNotFoundError) as ex:
        print(f"spec error: {ex}", file=sys.stderr)
        return 2
    for path in render(spec, args.out_dir):
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
