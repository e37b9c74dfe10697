"""Command-line front end.

    rishet sweep --preset rate_vs_users --out results/
    rishet sweep --spec my_sweep.json --parallelism 4
    rishet single --config cfg.json --algorithm PA --seed 7 --out run7/
    rishet validate-config --config cfg.json

Exit codes: 0 success, 2 invalid configuration or spec, 3 traversal
refused because the association space exceeds its enumeration budget.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .optimizers import TraversalSizeError
from .scenario import ConfigError, ScenarioConfig, validate_config_dict
from .sweeps import ALGORITHMS, SweepSpec, preset_sweep, run_single, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TRAVERSAL = 3


def _parse_seeds(text: str) -> tuple[int, ...]:
    """'0:20' is a half-open range, '1,5,9' an explicit list."""
    if ":" in text:
        lo, hi = text.split(":", 1)
        return tuple(range(int(lo), int(hi)))
    return tuple(int(s) for s in text.split(","))


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _cmd_sweep(args: argparse.Namespace) -> int:
    try:
        if args.preset:
            spec = preset_sweep(args.preset)
        else:
            spec = SweepSpec.from_dict(_load_json(args.spec))
        if args.seeds:
            spec = dataclasses.replace(spec, seeds=_parse_seeds(args.seeds))
        if args.algorithms:
            algorithms = tuple(args.algorithms.split(","))
            unknown = [a for a in algorithms if a not in ALGORITHMS]
            if unknown:
                raise ValueError(f"unknown algorithms {unknown}")
            spec = dataclasses.replace(spec, algorithms=algorithms)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"invalid sweep spec: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rows = run_sweep(spec, out_dir=Path(args.out), parallelism=args.parallelism)
    except ConfigError as exc:
        print(f"invalid scenario config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TraversalSizeError as exc:
        print(f"traversal refused: {exc}", file=sys.stderr)
        return EXIT_TRAVERSAL
    print(f"{len(rows)} rows -> {Path(args.out) / spec.name}")
    return EXIT_OK


def _cmd_single(args: argparse.Namespace) -> int:
    try:
        config = ScenarioConfig.from_dict(_load_json(args.config))
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.algorithm not in ALGORITHMS:
        print(
            f"unknown algorithm {args.algorithm!r}; choose from {', '.join(ALGORITHMS)}",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    try:
        result = run_single(
            config,
            args.algorithm,
            args.seed,
            Path(args.out),
            traversal_max_enum=args.max_enum,
        )
    except TraversalSizeError as exc:
        print(f"traversal refused: {exc}", file=sys.stderr)
        return EXIT_TRAVERSAL
    print(
        f"{args.algorithm} seed {args.seed}: sum rate {result['sum_rate']:.4g} bit/s, "
        f"fairness {result['fairness']:.4f}"
    )
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        raw = _load_json(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    errors = validate_config_dict(raw)
    if errors:
        for err in errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    print("config ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rishet",
        description="Simulate and optimize surface-assisted multi-band uplinks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    group = p_sweep.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", help="built-in sweep name")
    group.add_argument("--spec", help="JSON sweep spec file")
    p_sweep.add_argument("--out", default="results", help="output directory")
    p_sweep.add_argument("--seeds", help="override seeds, '0:20' or '1,5,9'")
    p_sweep.add_argument("--algorithms", help="override algorithms, comma separated")
    p_sweep.add_argument("--parallelism", type=int, default=1, help="worker processes")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_single = sub.add_parser("single", help="run one algorithm on one scenario")
    p_single.add_argument("--config", required=True, help="scenario config JSON")
    p_single.add_argument("--algorithm", required=True, help="|".join(ALGORITHMS))
    p_single.add_argument("--seed", type=int, required=True)
    p_single.add_argument("--out", default="run", help="output directory")
    p_single.add_argument("--max-enum", type=int, default=1_000_000, dest="max_enum")
    p_single.set_defaults(func=_cmd_single)

    p_val = sub.add_parser("validate-config", help="check a scenario config")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=_cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
