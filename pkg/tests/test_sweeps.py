"""Sweep presets, axis application, execution and file outputs."""

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from conftest import build, cellular_pair_config, mixed_three_cell_config
from rishet.scenario import ScenarioConfig
from rishet.sweeps import (
    ALGORITHMS,
    CSV_COLUMNS,
    MACRO_GROUP,
    SMALL_GROUP,
    SweepSpec,
    algorithm_rng,
    apply_axis,
    default_config_dict,
    default_layout,
    preset_sweep,
    run_algorithm,
    run_single,
    run_sweep,
    small_traversal_config_dict,
)

PRESET_NAMES = (
    "rate_vs_users",
    "rate_vs_subchannels",
    "rate_vs_surface_side",
    "rate_vs_phase_bits",
    "rate_vs_blockage",
    "rate_vs_beamwidth",
    "deviation_vs_size",
    "rate_vs_thz",
)


def test_group_tables():
    assert MACRO_GROUP == (4, 5, 6, 7, 8, 9, 10)
    assert SMALL_GROUP == (2, 3, 4, 5, 6, 7, 8)
    assert ALGORITHMS == ("PA", "CGA", "RO", "RA", "CCGA", "OS")


def test_default_layout_composition():
    layout = default_layout()
    assert len(layout) == 10
    bands = [st["band"] for st in layout]
    assert bands.count("fourg") == 1
    assert bands.count("fiveg_low") == 3
    assert bands.count("fiveg_mid") == 2
    assert sorted(b for b in bands if b.startswith("mmwave")) == [
        "mmwave26",
        "mmwave27",
        "mmwave28",
        "mmwave29",
    ]
    assert default_layout(thz=True)[6]["band"] == "thz"
    # the whole drop passes validation
    cfg = default_config_dict()
    ScenarioConfig.from_dict(cfg)
    assert cfg["user_counts"] == [10] + [5] * 9


def test_small_traversal_config_scales_sharing():
    for n in range(1, 7):
        cfg = small_traversal_config_dict(n)
        expected = max(2, n)
        assert all(st["num_subchannels"] == expected for st in cfg["base_stations"])
        assert cfg["user_counts"] == [n, n, n]
        ScenarioConfig.from_dict(cfg)


def test_apply_axis_user_group():
    cfg = apply_axis(default_config_dict(), "user_group", 1)
    assert cfg["user_counts"][0] == 4
    assert set(cfg["user_counts"][1:]) == {2}
    cfg = apply_axis(default_config_dict(), "user_group", 7)
    assert cfg["user_counts"][0] == 10
    assert set(cfg["user_counts"][1:]) == {8}


def test_apply_axis_subchannel_group():
    cfg = apply_axis(default_config_dict(), "subchannel_group", 3)
    for st in cfg["base_stations"]:
        expected = 6 if st["band"] == "fourg" else 4
        assert st["num_subchannels"] == expected


def test_apply_axis_surface_and_phase():
    base = default_config_dict()
    base["base_stations"][6]["ris"] = {"rows_cols": 4}
    cfg = apply_axis(base, "surface_side", 8)
    assert cfg["ris_defaults"]["rows_cols"] == 8
    assert cfg["base_stations"][6]["ris"]["rows_cols"] == 8
    cfg = apply_axis(base, "phase_bits", 2)
    assert cfg["ris_defaults"]["quant_bits"] == 2
    assert cfg["base_stations"][6]["ris"]["quant_bits"] == 2


def test_apply_axis_scalars():
    cfg = apply_axis(default_config_dict(), "blockage_per_meter", 0.01)
    assert cfg["blockage_per_meter"] == 0.01
    cfg = apply_axis(default_config_dict(), "beamwidth_deg", 45)
    assert cfg["half_power_beamwidth_deg"] == 45.0
    cfg = apply_axis(mixed_three_cell_config(), "users_per_cell", 4)
    assert cfg["user_counts"] == [4, 4, 4]
    assert all(st["num_subchannels"] == 4 for st in cfg["base_stations"])
    cfg = apply_axis(mixed_three_cell_config(), "users_per_cell", 1)
    assert cfg["user_counts"] == [1, 1, 1]
    assert all(st["num_subchannels"] == 2 for st in cfg["base_stations"])


def test_apply_axis_thz_swap():
    cfg = apply_axis(default_config_dict(), "thz", True)
    bands = [st["band"] for st in cfg["base_stations"]]
    assert "thz" in bands and "mmwave26" not in bands
    back = apply_axis(cfg, "thz", False)
    assert [st["band"] for st in back["base_stations"]] == [
        st["band"] for st in default_config_dict()["base_stations"]
    ]


def test_apply_axis_copies_and_rejects():
    base = default_config_dict()
    apply_axis(base, "blockage_per_meter", 0.5)
    assert "blockage_per_meter" not in base
    with pytest.raises(ValueError):
        apply_axis(base, "tilt_deg", 1)


def test_spec_round_trip():
    spec = preset_sweep("rate_vs_surface_side", seeds=(0, 1))
    again = SweepSpec.from_dict(spec.to_dict())
    assert again == spec
    with pytest.raises(ValueError):
        SweepSpec.from_dict(
            {"name": "x", "axis": "user_group", "values": [1], "seeds": [0], "algorithms": ["XX"]}
        )


def test_preset_catalogue():
    for name in PRESET_NAMES:
        spec = preset_sweep(name, seeds=(0,))
        assert spec.name == name
        assert spec.values and spec.seeds == (0,)
        for alg in spec.algorithms:
            assert alg in ALGORITHMS
    assert preset_sweep("rate_vs_users").values == tuple(range(1, 8))
    assert preset_sweep("rate_vs_surface_side").values == (2, 4, 6, 8)
    assert preset_sweep("rate_vs_phase_bits").values == (1, 2, 3, 4)
    assert preset_sweep("deviation_vs_size").algorithms == ("PA", "OS")
    assert preset_sweep("deviation_vs_size").values == (1, 2, 3, 4, 5, 6)
    assert preset_sweep("rate_vs_thz").values == (False, True)
    with pytest.raises(ValueError):
        preset_sweep("rate_vs_rain")


def test_algorithm_rng_streams():
    a = algorithm_rng(3, "PA").integers(0, 1 << 30, size=4)
    b = algorithm_rng(3, "PA").integers(0, 1 << 30, size=4)
    c = algorithm_rng(3, "CGA").integers(0, 1 << 30, size=4)
    d = algorithm_rng(4, "PA").integers(0, 1 << 30, size=4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_run_algorithm_iteration_semantics(mixed_scn):
    report, runtime_ms, iterations, res = run_algorithm(mixed_scn, "PA", 0)
    assert report.sum_rate > 0 and runtime_ms >= 0
    assert iterations == res.trace.records[-1]["outer"]
    _, _, rounds, res = run_algorithm(mixed_scn, "CGA", 0)
    assert rounds == res.trace.records[-1]["round"]
    _, _, draws, _ = run_algorithm(mixed_scn, "RA", 0)
    assert draws == 100
    _, _, enumerated, res = run_algorithm(mixed_scn, "OS", 0)
    assert enumerated == res.enumerated


def tiny_spec(**overrides):
    base = dict(
        name="tiny",
        axis="users_per_cell",
        values=(1, 2),
        seeds=(0, 1),
        algorithms=("CGA", "RA"),
        base=cellular_pair_config(),
    )
    base.update(overrides)
    return SweepSpec(**base)


def strip_runtime(rows):
    return [{k: v for k, v in r.items() if k != "runtime_ms"} for r in rows]


def test_run_sweep_rows_and_files(tmp_path):
    spec = tiny_spec()
    rows = run_sweep(spec, out_dir=tmp_path)
    assert len(rows) == 2 * 2 * 2
    assert [r["value"] for r in rows] == [1, 1, 1, 1, 2, 2, 2, 2]
    assert all(tuple(r.keys()) == CSV_COLUMNS for r in rows)

    target = tmp_path / "tiny"
    with open(target / "sweep.csv") as fh:
        reader = csv.DictReader(fh)
        assert tuple(reader.fieldnames) == CSV_COLUMNS
        disk_rows = list(reader)
    assert len(disk_rows) == len(rows)
    assert disk_rows[0]["algorithm"] == "CGA"

    with open(target / "summary.csv") as fh:
        summary = list(csv.DictReader(fh))
    assert [(r["value"], r["algorithm"]) for r in summary] == [
        ("1", "CGA"),
        ("1", "RA"),
        ("2", "CGA"),
        ("2", "RA"),
    ]
    assert all(r["n_seeds"] == "2" for r in summary)
    got = float(summary[0]["sum_rate_mean"])
    manual = np.mean([r["sum_rate"] for r in rows if r["value"] == 1 and r["algorithm"] == "CGA"])
    assert got == pytest.approx(manual, rel=1e-12)

    with open(target / "meta.json") as fh:
        assert json.load(fh) == spec.to_dict()
    assert not (target / "deviation.csv").exists()


def test_run_sweep_rerun_identical_modulo_runtime(tmp_path):
    spec = tiny_spec(seeds=(0,), values=(2,))
    rows1 = run_sweep(spec, out_dir=tmp_path / "a")
    rows2 = run_sweep(spec, out_dir=tmp_path / "b")
    assert strip_runtime(rows1) == strip_runtime(rows2)


def test_run_sweep_parallel_matches_serial(tmp_path):
    spec = tiny_spec()
    serial = run_sweep(spec, parallelism=1)
    parallel = run_sweep(spec, parallelism=2)
    assert strip_runtime(serial) == strip_runtime(parallel)


def test_run_sweep_writes_deviation_for_pa_vs_os(tmp_path):
    spec = tiny_spec(algorithms=("PA", "OS"), seeds=(0, 1), values=(1, 2))
    rows = run_sweep(spec, out_dir=tmp_path)
    target = tmp_path / "tiny"
    with open(target / "deviation.csv") as fh:
        dev = list(csv.DictReader(fh))
    assert [int(r["seed"]) for r in dev] == [0, 1]
    for r in dev:
        assert 0.0 <= float(r["average_deviation"]) < 1.0
    # the traversal bound makes every deviation non-negative
    by_cell = {(r["value"], r["seed"], r["algorithm"]): r["sum_rate"] for r in rows}
    for value in (1, 2):
        for seed in (0, 1):
            assert by_cell[(value, seed, "PA")] <= by_cell[(value, seed, "OS")] * (1 + 1e-9)


def test_run_single_outputs(tmp_path):
    config = ScenarioConfig.from_dict(mixed_three_cell_config())
    result = run_single(config, "PA", 3, tmp_path / "one")
    assert result["sum_rate"] > 0
    assert "runtime_ms" in result

    stored = json.loads((tmp_path / "one" / "result.json").read_text())
    assert "runtime_ms" not in stored
    assert stored["sum_rate"] == result["sum_rate"]
    assert stored["assignment"]["serving"] == result["assignment"]["serving"]

    trace = json.loads((tmp_path / "one" / "trace.json").read_text())
    assert "elapsed_s" not in trace
    assert trace["algorithm"] == "bcd"

    scn_blob = json.loads((tmp_path / "one" / "scenario.json").read_text())
    assert scn_blob["seed"] == 3
    assert len(scn_blob["users"]) == 6


def test_run_single_rerun_byte_identical(tmp_path):
    config = ScenarioConfig.from_dict(mixed_three_cell_config())
    run_single(config, "CGA", 1, tmp_path / "a")
    run_single(config, "CGA", 1, tmp_path / "b")
    for name in ("scenario.json", "result.json", "trace.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_run_single_traversal_trace(tmp_path):
    config = ScenarioConfig.from_dict(cellular_pair_config())
    result = run_single(config, "OS", 0, tmp_path / "os")
    trace = json.loads((tmp_path / "os" / "trace.json").read_text())
    assert trace["algorithm"] == "traversal"
    assert trace["records"][0]["enumerated"] == result["iterations"]
    assert "elapsed_s" not in trace
    with pytest.raises(ValueError):
        run_single(config, "GREEDY", 0, tmp_path / "bad")
