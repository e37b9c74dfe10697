"""Experiment presets and sweep execution.

A sweep varies one axis of a base configuration over a value grid, runs
a set of algorithms per (value, seed) cell on the identical frozen
scenario, and writes flat CSV plus summary files.  Row content is
deterministic for fixed inputs except the runtime columns, which carry
wall-clock measurements by design.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .optimizers import (
    OptimizationResult,
    TraversalResult,
    baseline_ccga,
    baseline_cga,
    baseline_ra,
    baseline_ro,
    bcd_optimize,
    traversal_optimal,
)
from .rates import RateReport
from .scenario import ScenarioConfig, build_scenario

# Per-tier value ladders used by the user-count and sub-channel sweeps:
# one column per group index 1..7, wide-area tier first.
MACRO_GROUP = (4, 5, 6, 7, 8, 9, 10)
SMALL_GROUP = (2, 3, 4, 5, 6, 7, 8)

ALGORITHMS = ("PA", "CGA", "RO", "RA", "CCGA", "OS")
_ALGO_SEED_CODE = {"PA": 11, "CGA": 12, "RO": 13, "RA": 14, "CCGA": 15, "OS": 16}

CSV_COLUMNS = (
    "axis",
    "value",
    "seed",
    "algorithm",
    "sum_rate",
    "fairness",
    "runtime_ms",
    "iterations",
)


# ---------------------------------------------------------------------------
# built-in configurations


def default_layout(
    subch_macro: int = 6,
    subch_other: int = 4,
    thz: bool = False,
) -> list[dict[str, Any]]:
    """Ten-cell reference layout: one wide-area cell, five mid tiers, four
    steered small cells in the corners, everything inside the macro disk."""
    mm_first = "thz" if thz else "mmwave26"
    return [
        {"band": "fourg", "position": [0.0, 0.0], "num_subchannels": subch_macro},
        {"band": "fiveg_low", "position": [-700.0, 0.0], "num_subchannels": subch_other},
        {"band": "fiveg_low", "position": [700.0, 0.0], "num_subchannels": subch_other},
        {"band": "fiveg_low", "position": [0.0, 800.0], "num_subchannels": subch_other},
        {"band": "fiveg_mid", "position": [0.0, -800.0], "num_subchannels": subch_other},
        {"band": "fiveg_mid", "position": [150.0, 150.0], "num_subchannels": subch_other},
        {"band": mm_first, "position": [-600.0, 600.0], "num_subchannels": subch_other},
        {"band": "mmwave27", "position": [600.0, 600.0], "num_subchannels": subch_other},
        {"band": "mmwave28", "position": [600.0, -600.0], "num_subchannels": subch_other},
        {"band": "mmwave29", "position": [-600.0, -600.0], "num_subchannels": subch_other},
    ]


def default_config_dict(
    users_macro: int = 10,
    users_other: int = 5,
    subch_macro: int = 6,
    subch_other: int = 4,
    thz: bool = False,
    **extra: Any,
) -> dict[str, Any]:
    cfg: dict[str, Any] = {
        "name": extra.pop("name", "default"),
        "base_stations": default_layout(subch_macro, subch_other, thz=thz),
        "user_counts": [users_macro] + [users_other] * 9,
    }
    cfg.update(extra)
    return cfg


def small_traversal_config_dict(users_per_cell: int = 2) -> dict[str, Any]:
    """Three-cell instance small enough for exhaustive traversal.

    Subchannel counts track the per-cell load the way the preset group
    tables do, so the instances stay in the lightly shared regime.
    """
    s = max(2, users_per_cell)
    return {
        "name": "traversal_small",
        "base_stations": [
            {"band": "fourg", "position": [0.0, 0.0], "num_subchannels": s},
            {"band": "fiveg_low", "position": [200.0, 0.0], "num_subchannels": s},
            {
                "band": "mmwave26",
                "position": [-200.0, 0.0],
                "num_subchannels": s,
                "ris": {"rows_cols": 6},
            },
        ],
        "user_counts": [users_per_cell] * 3,
    }


# ---------------------------------------------------------------------------
# sweep axes


def apply_axis(base: dict[str, Any], axis: str, value: Any) -> dict[str, Any]:
    """Base config dict with one swept parameter applied."""
    cfg = json.loads(json.dumps(base))  # deep copy, JSON types only
    if axis == "user_group":
        g = int(value)
        counts = []
        for st in cfg["base_stations"]:
            counts.append(MACRO_GROUP[g - 1] if st["band"] == "fourg" else SMALL_GROUP[g - 1])
        cfg["user_counts"] = counts
        cfg.pop("user_positions", None)
    elif axis == "subchannel_group":
        g = int(value)
        for st in cfg["base_stations"]:
            st["num_subchannels"] = MACRO_GROUP[g - 1] if st["band"] == "fourg" else SMALL_GROUP[g - 1]
    elif axis == "surface_side":
        cfg.setdefault("ris_defaults", {})["rows_cols"] = int(value)
        for st in cfg["base_stations"]:
            if "ris" in st:
                st["ris"]["rows_cols"] = int(value)
    elif axis == "phase_bits":
        cfg.setdefault("ris_defaults", {})["quant_bits"] = int(value)
        for st in cfg["base_stations"]:
            if "ris" in st:
                st["ris"]["quant_bits"] = int(value)
    elif axis == "blockage_per_meter":
        cfg["blockage_per_meter"] = float(value)
    elif axis == "beamwidth_deg":
        cfg["half_power_beamwidth_deg"] = float(value)
    elif axis == "users_per_cell":
        # the small-instance load axis: subchannel counts track the load so
        # the swept instances stay lightly shared, matching
        # small_traversal_config_dict at every size
        n = int(value)
        cfg["user_counts"] = [n] * len(cfg["base_stations"])
        for st in cfg["base_stations"]:
            st["num_subchannels"] = max(2, n)
        cfg.pop("user_positions", None)
    elif axis == "thz":
        on = bool(value)
        for st in cfg["base_stations"]:
            if st["band"] == ("mmwave26" if on else "thz"):
                st["band"] = "thz" if on else "mmwave26"
    else:
        raise ValueError(f"unknown sweep axis {axis!r}")
    return cfg


@dataclass(frozen=True)
class SweepSpec:
    name: str
    axis: str
    values: tuple
    seeds: tuple[int, ...]
    algorithms: tuple[str, ...]
    base: dict[str, Any] = field(default_factory=default_config_dict)
    traversal_max_enum: int = 1_000_000

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "axis": self.axis,
            "values": list(self.values),
            "seeds": list(self.seeds),
            "algorithms": list(self.algorithms),
            "base": self.base,
            "traversal_max_enum": self.traversal_max_enum,
        }

    @staticmethod
    def from_dict(raw: dict[str, Any]) -> "SweepSpec":
        unknown = [a for a in raw.get("algorithms", []) if a not in ALGORITHMS]
        if unknown:
            raise ValueError(f"unknown algorithms {unknown}; choose from {list(ALGORITHMS)}")
        return SweepSpec(
            name=str(raw["name"]),
            axis=str(raw["axis"]),
            values=tuple(raw["values"]),
            seeds=tuple(int(s) for s in raw["seeds"]),
            algorithms=tuple(raw.get("algorithms", ("PA", "CGA", "RO", "RA", "CCGA"))),
            base=raw.get("base", default_config_dict()),
            traversal_max_enum=int(raw.get("traversal_max_enum", 1_000_000)),
        )


def preset_sweep(name: str, seeds: tuple[int, ...] = tuple(range(20))) -> SweepSpec:
    """Ready-made sweeps mirroring the study's headline experiments."""
    dense = default_config_dict(users_macro=7, users_other=5, subch_macro=5, subch_other=3)
    presets = {
        "rate_vs_users": SweepSpec(
            name="rate_vs_users",
            axis="user_group",
            values=tuple(range(1, 8)),
            seeds=seeds,
            algorithms=("PA", "CGA", "RO", "RA", "CCGA"),
            base=default_config_dict(subch_macro=6, subch_other=4),
        ),
        "rate_vs_subchannels": SweepSpec(
            name="rate_vs_subchannels",
            axis="subchannel_group",
            values=tuple(range(1, 8)),
            seeds=seeds,
            algorithms=("PA", "CGA", "RO", "RA", "CCGA"),
            base=default_config_dict(users_macro=7, users_other=5),
        ),
        "rate_vs_surface_side": SweepSpec(
            name="rate_vs_surface_side",
            axis="surface_side",
            values=(2, 4, 6, 8),
            seeds=seeds,
            algorithms=("PA", "CGA", "RO", "RA", "CCGA"),
            base=dense,
        ),
        "rate_vs_phase_bits": SweepSpec(
            name="rate_vs_phase_bits",
            axis="phase_bits",
            values=(1, 2, 3, 4),
            seeds=seeds,
            algorithms=("PA", "CGA", "RO", "RA", "CCGA"),
            base=dense,
        ),
        "rate_vs_blockage": SweepSpec(
            name="rate_vs_blockage",
            axis="blockage_per_meter",
            values=(0.001, 0.005, 0.01),
            seeds=seeds,
            algorithms=("PA", "CGA", "RO", "RA", "CCGA"),
            base=dense,
        ),
        "rate_vs_beamwidth": SweepSpec(
            name="rate_vs_beamwidth",
            axis="beamwidth_deg",
            values=(30.0, 40.0, 50.0),
            seeds=seeds,
            algorithms=("PA", "CGA", "RO", "RA", "CCGA"),
            base=dense,
        ),
        "deviation_vs_size": SweepSpec(
            name="deviation_vs_size",
            axis="users_per_cell",
            values=(1, 2, 3, 4, 5, 6),
            seeds=seeds,
            algorithms=("PA", "OS"),
            base=small_traversal_config_dict(),
        ),
        "rate_vs_thz": SweepSpec(
            name="rate_vs_thz",
            axis="thz",
            values=(False, True),
            seeds=seeds,
            algorithms=("PA", "CGA", "RO", "RA", "CCGA"),
            base=default_config_dict(subch_macro=6, subch_other=4),
        ),
    }
    if name not in presets:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(presets)}")
    return presets[name]


# ---------------------------------------------------------------------------
# execution


def algorithm_rng(seed: int, algorithm: str) -> np.random.Generator:
    """Stream for one (seed, algorithm) pair, independent across algorithms."""
    return np.random.default_rng(np.random.SeedSequence([seed, _ALGO_SEED_CODE[algorithm]]))


def run_algorithm(
    scn, algorithm: str, seed: int, traversal_max_enum: int = 1_000_000
) -> tuple[RateReport, float, int, Any]:
    """(report, runtime_ms, iteration count, full result) of one run."""
    if algorithm == "OS":
        res: TraversalResult = traversal_optimal(scn, max_enum=traversal_max_enum)
        return res.report, res.elapsed_s * 1e3, res.enumerated, res
    rng = algorithm_rng(seed, algorithm)
    runner = {
        "PA": bcd_optimize,
        "CGA": baseline_cga,
        "RO": baseline_ro,
        "RA": baseline_ra,
        "CCGA": baseline_ccga,
    }[algorithm]
    res: OptimizationResult = runner(scn, rng)
    trace = res.trace
    if algorithm == "PA":
        iterations = trace.records[-1].get("outer", 0)
    elif algorithm in ("CGA", "CCGA"):
        iterations = trace.records[-1].get("round", 0)
    elif algorithm == "RO":
        iterations = sum(r.get("sweeps", 0) for r in trace.records)
    else:
        iterations = trace.records[0].get("draws", 0)
    return res.report, trace.elapsed_s * 1e3, iterations, res


def _run_cell(args: tuple) -> list[dict[str, Any]]:
    base, axis, value, seed, algorithms, max_enum = args
    cfg = ScenarioConfig.from_dict(apply_axis(base, axis, value))
    scn = build_scenario(cfg, seed)
    rows = []
    for alg in algorithms:
        report, runtime_ms, iterations, _ = run_algorithm(
            scn, alg, seed, traversal_max_enum=max_enum
        )
        rows.append(
            {
                "axis": axis,
                "value": value,
                "seed": seed,
                "algorithm": alg,
                "sum_rate": report.sum_rate,
                "fairness": report.fairness,
                "runtime_ms": runtime_ms,
                "iterations": iterations,
            }
        )
    return rows


def run_sweep(
    spec: SweepSpec, out_dir: Optional[Path] = None, parallelism: int = 1
) -> list[dict[str, Any]]:
    """Execute a sweep; returns flat rows and optionally writes them.

    Cells run in (value, seed) order; with a worker pool the collection
    order is still fixed, so outputs are stable for fixed inputs apart
    from the wall-clock columns.
    """
    jobs = [
        (spec.base, spec.axis, value, seed, spec.algorithms, spec.traversal_max_enum)
        for value in spec.values
        for seed in spec.seeds
    ]
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_run_cell, jobs))
    else:
        results = [_run_cell(job) for job in jobs]
    rows = [row for chunk in results for row in chunk]
    if out_dir is not None:
        write_sweep_outputs(spec, rows, Path(out_dir))
    return rows


def write_sweep_outputs(spec: SweepSpec, rows: list[dict[str, Any]], out_dir: Path) -> Path:
    """sweep.csv + summary.csv + meta.json under out_dir/<sweep name>/."""
    target = out_dir / spec.name
    target.mkdir(parents=True, exist_ok=True)
    with open(target / "sweep.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)

    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["value"], row["algorithm"]), []).append(row)
    with open(target / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "axis",
                "value",
                "algorithm",
                "sum_rate_mean",
                "sum_rate_std",
                "fairness_mean",
                "fairness_std",
                "runtime_ms_mean",
                "n_seeds",
            ]
        )
        for value in spec.values:
            for alg in spec.algorithms:
                cell = groups.get((value, alg), [])
                if not cell:
                    continue
                sr = np.array([r["sum_rate"] for r in cell])
                fa = np.array([r["fairness"] for r in cell])
                rt = np.array([r["runtime_ms"] for r in cell])
                writer.writerow(
                    [
                        spec.axis,
                        value,
                        alg,
                        repr(float(sr.mean())),
                        repr(float(sr.std())),
                        repr(float(fa.mean())),
                        repr(float(fa.std())),
                        repr(float(rt.mean())),
                        len(cell),
                    ]
                )

    if "PA" in spec.algorithms and "OS" in spec.algorithms:
        _write_deviation(spec, rows, target)

    with open(target / "meta.json", "w") as fh:
        json.dump(spec.to_dict(), fh, indent=2, sort_keys=True)
    return target


def _write_deviation(spec: SweepSpec, rows: list[dict[str, Any]], target: Path) -> None:
    """Per-seed mean relative shortfall of PA against the traversal optimum."""
    by_seed: dict[int, dict[Any, dict[str, float]]] = {}
    for row in rows:
        if row["algorithm"] in ("PA", "OS"):
            by_seed.setdefault(row["seed"], {}).setdefault(row["value"], {})[
                row["algorithm"]
            ] = row["sum_rate"]
    with open(target / "deviation.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "average_deviation"])
        for seed in spec.seeds:
            cells = by_seed.get(seed, {})
            pairs = [
                (v["OS"], v["PA"]) for v in cells.values() if "OS" in v and "PA" in v
            ]
            if not pairs:
                continue
            dev = float(np.mean([(o - p) / o for o, p in pairs if o > 0]))
            writer.writerow([seed, repr(dev)])


def run_single(
    config: ScenarioConfig,
    algorithm: str,
    seed: int,
    out_dir: Path,
    traversal_max_enum: int = 1_000_000,
) -> dict[str, Any]:
    """One algorithm on one frozen scenario; writes snapshot, result, trace."""
    from .scenario import scenario_to_dict

    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {list(ALGORITHMS)}")
    scn = build_scenario(config, seed)
    report, runtime_ms, iterations, res = run_algorithm(
        scn, algorithm, seed, traversal_max_enum=traversal_max_enum
    )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "scenario.json", "w") as fh:
        json.dump(scenario_to_dict(scn), fh, sort_keys=True)
    result = {
        "algorithm": algorithm,
        "seed": seed,
        "sum_rate": report.sum_rate,
        "fairness": report.fairness,
        "per_user_rate": report.per_user_rate.tolist(),
        "per_bs_utility": report.per_bs_utility.tolist(),
        "runtime_ms": runtime_ms,
        "iterations": iterations,
        "assignment": res.assignment.to_dict() if res.assignment is not None else None,
        "phases": res.phases.to_dict() if res.phases is not None else None,
    }
    # files are reproduction artifacts: identical command, identical bytes,
    # so the wall-clock fields stay out of them (the caller still gets them)
    stored = {k: v for k, v in result.items() if k != "runtime_ms"}
    with open(out_dir / "result.json", "w") as fh:
        json.dump(stored, fh, sort_keys=True)
    trace_payload = res.trace.to_dict() if hasattr(res, "trace") else {
        "algorithm": "traversal",
        "records": [{"enumerated": res.enumerated}],
        "converged": True,
        "termination": "exhausted",
    }
    trace_payload.pop("elapsed_s", None)
    with open(out_dir / "trace.json", "w") as fh:
        json.dump(trace_payload, fh, sort_keys=True)
    return result
