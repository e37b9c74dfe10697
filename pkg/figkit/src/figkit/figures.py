"""Sweep CSVs to publication-style figures.

Input is the experiment CLI's ``sweep.csv`` schema: one row per
(axis, value, seed, algorithm) cell with ``sum_rate``, ``fairness``,
``runtime_ms`` and ``iterations`` columns.  Rendering is read-only over
the CSVs and aggregates nothing beyond per-cell mean and std across
seeds.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KEY_COLUMNS = ("axis", "value", "seed", "algorithm")

KINDS = ("line", "bars", "runtime")

# one metric per kind unless the spec overrides it
DEFAULT_METRIC = {"line": "sum_rate", "bars": "fairness", "runtime": "runtime_ms"}

METRIC_LABEL = {
    "sum_rate": "sum rate (bit/s)",
    "fairness": "fairness index",
    "runtime_ms": "runtime (ms)",
    "iterations": "iterations",
}

# fixed per-algorithm style so every figure reads the same way
STYLES = {
    "PA": {"color": "#1f77b4", "marker": "o", "linestyle": "-"},
    "CGA": {"color": "#d62728", "marker": "s", "linestyle": "--"},
    "RO": {"color": "#2ca02c", "marker": "^", "linestyle": "-."},
    "RA": {"color": "#9467bd", "marker": "v", "linestyle": ":"},
    "CCGA": {"color": "#8c564b", "marker": "D", "linestyle": "--"},
    "OS": {"color": "#ff7f0e", "marker": "*", "linestyle": "-"},
}
SERIES_ORDER = tuple(STYLES)

BAND_ALPHA = 0.18


class EmptySweepError(ValueError):
    """The CSV holds no data rows (or no header at all)."""


class SchemaError(ValueError):
    """Required columns are absent; the message names each one."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure: a CSV, a kind, labels and a destination image."""

    csv_path: Path
    kind: str
    out_path: Path
    metric: str = ""  # empty means the kind's default
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""

    def resolved_metric(self) -> str:
        if self.kind not in DEFAULT_METRIC:
            raise ValueError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")
        metric = self.metric or DEFAULT_METRIC[self.kind]
        if metric not in METRIC_LABEL:
            raise ValueError(
                f"unknown metric {metric!r}; choose from {tuple(METRIC_LABEL)}"
            )
        return metric


def load_rows(csv_path: Path, required: tuple[str, ...]) -> list[dict]:
    """Data rows of one sweep CSV, schema-checked against ``required``."""
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        rows = list(reader)
    if header is None:
        raise EmptySweepError(f"{csv_path} is empty")
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{csv_path} is missing column(s) {', '.join(missing)}")
    if not rows:
        raise EmptySweepError(f"{csv_path} has no data rows")
    return rows


def _parse_value(text: str):
    if text == "True":
        return True
    if text == "False":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _sweep_values(rows: list[dict]) -> list:
    """Distinct swept values: numeric ones sorted, others in file order."""
    seen = []
    for row in rows:
        v = _parse_value(row["value"])
        if v not in seen:
            seen.append(v)
    numeric = all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in seen)
    return sorted(seen) if numeric else seen


def _algorithms(rows: list[dict]) -> list[str]:
    present = []
    for row in rows:
        if row["algorithm"] not in present:
            present.append(row["algorithm"])
    known = [a for a in SERIES_ORDER if a in present]
    return known + [a for a in present if a not in SERIES_ORDER]


def _stats(rows: list[dict], metric: str, algorithm: str, values: list):
    """(mean, std) arrays over ``values`` for one algorithm's series."""
    cells: dict = {v: [] for v in values}
    for row in rows:
        if row["algorithm"] == algorithm:
            cells[_parse_value(row["value"])].append(float(row[metric]))
    if any(not c for c in cells.values()):
        holes = [v for v, c in cells.items() if not c]
        raise ValueError(f"algorithm {algorithm!r} has no rows at value(s) {holes}")
    mean = np.array([np.mean(cells[v]) for v in values])
    std = np.array([np.std(cells[v]) for v in values])
    return mean, std


def build_figure(spec: FigureSpec):
    """The matplotlib Figure for one spec; raises before any file I/O."""
    metric = spec.resolved_metric()
    rows = load_rows(Path(spec.csv_path), KEY_COLUMNS + (metric,))
    values = _sweep_values(rows)
    algorithms = _algorithms(rows)
    multi_seed = len({row["seed"] for row in rows}) > 1

    numeric_axis = all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
    )
    # grouped bars are categorical by construction; lines keep real spacing
    positional = spec.kind == "bars" or not numeric_axis
    x = np.arange(len(values)) if positional else np.array(values, dtype=float)

    fig, ax = plt.subplots(figsize=(6.4, 4.4), layout="constrained")
    for k, alg in enumerate(algorithms):
        mean, std = _stats(rows, metric, alg, values)
        style = STYLES.get(alg, {})
        if spec.kind == "bars":
            width = 0.8 / len(algorithms)
            pos = x + (k - (len(algorithms) - 1) / 2) * width
            ax.bar(
                pos,
                mean,
                width,
                yerr=std if multi_seed else None,
                capsize=3 if multi_seed else 0,
                label=alg,
                color=style.get("color"),
            )
        else:
            ax.plot(x, mean, label=alg, **style)
            if multi_seed:
                ax.fill_between(
                    x,
                    mean - std,
                    mean + std,
                    color=style.get("color"),
                    alpha=BAND_ALPHA,
                    linewidth=0,
                )
    if spec.kind == "runtime":
        ax.set_yscale("log")
    if positional:
        ax.set_xticks(x)
        ax.set_xticklabels([str(v) for v in values])

    ax.set_xlabel(spec.xlabel or rows[0]["axis"])
    ax.set_ylabel(spec.ylabel or METRIC_LABEL[metric])
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    return fig


def render(spec: FigureSpec) -> Path:
    """Write one image; vector output, text kept as text in SVG."""
    fig = build_figure(spec)
    out = Path(spec.out_path)
    if not out.suffix:
        out = out.with_suffix(".svg")
    out.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.fonttype": "none"}):
        fig.savefig(out)
    plt.close(fig)
    return out


def _sweep_name(csv_path: Path) -> str:
    meta = csv_path.parent / "meta.json"
    if meta.exists():
        try:
            name = json.loads(meta.read_text()).get("name")
        except json.JSONDecodeError:
            name = None
        if name:
            return str(name)
    return csv_path.parent.name


def auto_specs(results_dir: Path, out_dir: Path | None = None) -> list[FigureSpec]:
    """One figure per sweep.csv under ``results_dir``.

    Numeric sweeps become sum-rate line figures, boolean on/off sweeps
    grouped sum-rate bars.  Names come from the sweep's meta.json when
    present, else the directory name; duplicates are refused rather than
    silently overwritten.
    """
    results_dir = Path(results_dir)
    specs = []
    named: dict[str, Path] = {}
    for csv_path in sorted(results_dir.rglob("sweep.csv")):
        name = _sweep_name(csv_path)
        if name in named:
            raise ValueError(
                f"two sweeps are both named {name!r}: {named[name]} and {csv_path}"
            )
        named[name] = csv_path
        rows = load_rows(csv_path, KEY_COLUMNS)
        values = _sweep_values(rows)
        boolean = all(isinstance(v, bool) for v in values)
        target = Path(out_dir) if out_dir is not None else csv_path.parent
        specs.append(
            FigureSpec(
                csv_path=csv_path,
                kind="bars" if boolean else "line",
                metric="sum_rate",
                out_path=target / f"{name}.svg",
                title=name,
            )
        )
    return specs
