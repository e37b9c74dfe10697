"""Command-line front end.

    figures --spec figures.json
    figures --auto results/ --out-dir figs/

A spec file is a JSON list of figure entries, each with ``csv``,
``kind`` (line | bars | runtime) and ``out``, plus optional ``metric``,
``xlabel``, ``ylabel`` and ``title``; relative paths resolve against
the spec file's directory.  Auto mode renders one figure per
``sweep.csv`` found under the results directory.

Exit codes: 0 success, 2 on a bad spec, schema mismatch or empty CSV.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .figures import FigureSpec, auto_specs, render

EXIT_OK = 0
EXIT_ERROR = 2

_SPEC_KEYS = {"csv", "kind", "out", "metric", "xlabel", "ylabel", "title"}


def load_spec_file(path: Path) -> list[FigureSpec]:
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, list) or not raw:
        raise ValueError(f"{path} must hold a non-empty JSON list of figure entries")
    base = path.parent
    specs = []
    for k, entry in enumerate(raw):
        unknown = set(entry) - _SPEC_KEYS
        if unknown:
            raise ValueError(f"entry {k}: unknown field(s) {sorted(unknown)}")
        missing = {"csv", "kind", "out"} - set(entry)
        if missing:
            raise ValueError(f"entry {k}: missing field(s) {sorted(missing)}")
        specs.append(
            FigureSpec(
                csv_path=base / entry["csv"],
                kind=entry["kind"],
                out_path=base / entry["out"],
                metric=entry.get("metric", ""),
                xlabel=entry.get("xlabel", ""),
                ylabel=entry.get("ylabel", ""),
                title=entry.get("title", ""),
            )
        )
    return specs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figures", description="Render figures from sweep CSVs."
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--spec", type=Path, help="JSON list of figure entries")
    source.add_argument(
        "--auto", type=Path, metavar="RESULTS_DIR", help="one figure per sweep.csv"
    )
    parser.add_argument(
        "--out-dir", type=Path, default=None, help="auto mode: image directory"
    )
    args = parser.parse_args(argv)

    try:
        if args.spec is not None:
            specs = load_spec_file(args.spec)
        else:
            specs = auto_specs(args.auto, args.out_dir)
            if not specs:
                raise ValueError(f"no sweep.csv found under {args.auto}")
        for spec in specs:
            print(f"wrote {render(spec)}")
    except (OSError, ValueError) as exc:
        print(f"figure error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
