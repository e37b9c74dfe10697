"""Scenario construction: determinism, draw stability, geometry, schema."""

import math

import numpy as np
import pytest

from conftest import build, mixed_three_cell_config, single_mm_config
from rishet.scenario import (
    ConfigError,
    CoverageError,
    RisPanel,
    ScenarioConfig,
    build_scenario,
    ris_element_grid,
    ris_element_position,
    scenario_from_dict,
    scenario_to_dict,
    scenario_to_json,
    validate_config_dict,
)


def test_build_deterministic():
    a = build(mixed_three_cell_config(), 7)
    b = build(mixed_three_cell_config(), 7)
    assert scenario_to_json(a) == scenario_to_json(b)


def test_seed_changes_draws():
    a = build(mixed_three_cell_config(), 0)
    b = build(mixed_three_cell_config(), 1)
    assert scenario_to_json(a) != scenario_to_json(b)
    assert not np.allclose(a.fading.shadow_db, b.fading.shadow_db)


def test_users_drawn_inside_their_cell():
    scn = build(mixed_three_cell_config(), 3)
    for u in scn.users:
        b = u.stable_key[0]
        st = scn.base_stations[b]
        d = math.hypot(u.position[0] - st.position[0], u.position[1] - st.position[1])
        assert d <= st.band.coverage_radius_m
        assert b in u.candidate_bs


def test_adding_users_leaves_existing_draws_alone():
    base = mixed_three_cell_config()
    grown = mixed_three_cell_config()
    grown["user_counts"] = [2, 1, 5]
    a = build(base, 11)
    b = build(grown, 11)
    assert b.num_users == a.num_users + 2
    for u_old, u_new in zip(a.users, b.users):
        assert u_old.position == u_new.position
        assert u_old.stable_key == u_new.stable_key
    n = a.num_users
    np.testing.assert_array_equal(a.fading.shadow_db, b.fading.shadow_db[:, :n])
    np.testing.assert_array_equal(a.fading.direct_power, b.fading.direct_power[:, :n])
    np.testing.assert_array_equal(
        a.fading.surface_los_phase[2], b.fading.surface_los_phase[2][:n]
    )
    np.testing.assert_array_equal(a.fading.surface_nlos[2], b.fading.surface_nlos[2][:n])


def test_adding_remote_cell_leaves_existing_draws_alone():
    base = mixed_three_cell_config()
    grown = mixed_three_cell_config()
    # Far enough out that no existing user gains a candidate cell.
    grown["base_stations"] = grown["base_stations"] + [
        {"band": "mmwave27", "position": [10000.0, 0.0], "num_subchannels": 2}
    ]
    grown["user_counts"] = [2, 1, 3, 0]
    a = build(base, 4)
    b = build(grown, 4)
    for u_old, u_new in zip(a.users, b.users):
        assert u_old.position == u_new.position
        assert u_old.candidate_bs == u_new.candidate_bs
    np.testing.assert_array_equal(a.fading.shadow_db, b.fading.shadow_db[:3])
    np.testing.assert_array_equal(a.fading.direct_power, b.fading.direct_power[:3])


def test_coverage_is_closed_disk():
    cfg = {
        "name": "rim",
        "base_stations": [
            {"band": "fiveg_low", "position": [0.0, 0.0], "num_subchannels": 2}
        ],
        "user_positions": [[350.0, 0.0]],
    }
    scn = build(cfg, 0)
    assert scn.users[0].candidate_bs == (0,)
    assert scn.users[0].stable_key == (-1, 0)

    cfg["user_positions"] = [[350.0001, 0.0]]
    with pytest.raises(CoverageError) as exc:
        build(cfg, 0)
    assert exc.value.user_id == 0

    cfg["allow_uncovered"] = True
    scn = build(cfg, 0)
    assert scn.users[0].candidate_bs == ()


def test_element_positions_hand_values():
    scn = build(single_mm_config(1, 2, rows_cols=2), 0)
    panel = scn.base_stations[0].panel
    assert panel is not None
    assert panel.num_elements == 4
    assert panel.phase_levels == 8
    # spacing 0.005, host at origin, radius 150
    assert ris_element_position(panel, 1, 1) == pytest.approx((-0.005, -150.0, 0.005))
    assert ris_element_position(panel, 1, 2) == pytest.approx((-0.005, -150.0, 0.010))
    assert ris_element_position(panel, 2, 1) == pytest.approx((0.0, -150.0, 0.005))
    assert ris_element_position(panel, 2, 2) == pytest.approx((0.0, -150.0, 0.010))


def test_element_grid_row_major():
    panel = RisPanel(host_bs_id=0, host_position=(10.0, 20.0), host_radius_m=150.0, rows_cols=3)
    grid = ris_element_grid(panel)
    assert grid.shape == (9, 3)
    k = 0
    for lx in range(1, 4):
        for lz in range(1, 4):
            np.testing.assert_allclose(grid[k], ris_element_position(panel, lx, lz))
            k += 1
    # x varies with the outer index, z with the inner one
    assert grid[0, 0] == grid[1, 0] == grid[2, 0]
    assert grid[0, 2] < grid[1, 2] < grid[2, 2]


def test_element_index_range():
    panel = RisPanel(host_bs_id=0, host_position=(0.0, 0.0), host_radius_m=150.0, rows_cols=2)
    for bad in [(0, 1), (1, 0), (3, 1), (1, 3)]:
        with pytest.raises(ValueError):
            ris_element_position(panel, *bad)


def test_panel_only_on_directional_cells():
    scn = build(mixed_three_cell_config(), 0)
    assert scn.base_stations[0].panel is None
    assert scn.base_stations[1].panel is None
    assert scn.base_stations[2].panel is not None
    assert scn.directional_bs_ids() == [2]


def test_ris_overrides_and_defaults():
    cfg = single_mm_config(1, 2, rows_cols=5, quant_bits=2)
    scn = build(cfg, 0)
    panel = scn.base_stations[0].panel
    assert panel.rows_cols == 5
    assert panel.quant_bits == 2
    assert panel.rician_factor == 4.0
    assert panel.los_exponent == 2.0
    assert panel.nlos_exponent == 2.5

    # Without an explicit ris block the shared defaults apply.
    cfg = single_mm_config(1, 2, rows_cols=2)
    del cfg["base_stations"][0]["ris"]
    cfg["ris_defaults"] = {"rows_cols": 6, "quant_bits": 1}
    scn = build(cfg, 0)
    assert scn.base_stations[0].panel.rows_cols == 6
    assert scn.base_stations[0].panel.phase_levels == 2


def test_fading_shapes():
    scn = build(mixed_three_cell_config(), 2)
    assert scn.fading.shadow_db.shape == (3, 6)
    assert scn.fading.direct_power.shape == (3, 6)
    assert set(scn.fading.surface_los_phase) == {2}
    assert scn.fading.surface_nlos[2].shape == (6, 4)
    assert np.all(scn.fading.direct_power > 0)
    phases = scn.fading.surface_los_phase[2]
    assert np.all((phases >= 0) & (phases < 2 * math.pi))


def test_nakagami_option_changes_scattered_fading():
    cfg = single_mm_config(3, 2, rows_cols=3)
    rayleigh = build(cfg, 5)
    cfg["nakagami_nlos"] = True
    nakagami = build(cfg, 5)
    assert nakagami.nakagami_nlos
    a = rayleigh.fading.surface_nlos[0]
    b = nakagami.fading.surface_nlos[0]
    assert a.shape == b.shape
    assert not np.allclose(a, b)
    # Everything outside the scattered surface draws stays identical.
    np.testing.assert_array_equal(rayleigh.fading.shadow_db, nakagami.fading.shadow_db)
    np.testing.assert_array_equal(
        rayleigh.fading.surface_los_phase[0], nakagami.fading.surface_los_phase[0]
    )


def test_serialization_round_trip():
    scn = build(mixed_three_cell_config(), 9)
    clone = scenario_from_dict(scenario_to_dict(scn))
    assert scenario_to_json(clone) == scenario_to_json(scn)
    np.testing.assert_array_equal(clone.fading.surface_nlos[2], scn.fading.surface_nlos[2])
    assert clone.base_stations[2].panel == scn.base_stations[2].panel


def test_config_round_trip():
    cfg = ScenarioConfig.from_dict(mixed_three_cell_config())
    again = ScenarioConfig.from_dict(cfg.to_dict())
    assert again == cfg


def test_band_overrides_resolved():
    cfg = mixed_three_cell_config()
    cfg["band_overrides"] = {"fiveg_low": {"coverage_radius_m": 500.0}}
    scn = build(cfg, 0)
    assert scn.base_stations[0].band.coverage_radius_m == 500.0
    assert scn.base_stations[1].band.coverage_radius_m == 500.0
    assert scn.base_stations[2].band.coverage_radius_m == 150.0


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda c: c.pop("base_stations"), "base_stations"),
        (lambda c: c["base_stations"][0].update(band="fm_radio"), "unknown band"),
        (lambda c: c["base_stations"][0].update(position=[1.0]), "position"),
        (lambda c: c["base_stations"][0].update(num_subchannels=0), "num_subchannels"),
        (lambda c: c["base_stations"][2].update(ris={"rows_cols": 0}), "rows_cols"),
        (lambda c: c.update(user_positions=[[0.0, 0.0]]), "exactly one"),
        (lambda c: c.pop("user_counts"), "exactly one"),
        (lambda c: c.update(user_counts=[1, 2]), "entries for"),
        (lambda c: c.update(user_counts=[1, -2, 3]), "non-negative"),
        (lambda c: c.update(blockage_per_meter=-0.5), "blockage_per_meter"),
    ],
)
def test_validate_config_errors(mutate, fragment):
    cfg = mixed_three_cell_config()
    mutate(cfg)
    errors = validate_config_dict(cfg)
    assert any(fragment in e for e in errors), errors


def test_validate_clean_config():
    assert validate_config_dict(mixed_three_cell_config()) == []


def test_duplicate_directional_carrier_rejected():
    cfg = {
        "name": "dup",
        "base_stations": [
            {"band": "mmwave26", "position": [0.0, 0.0], "num_subchannels": 2},
            {"band": "mmwave26", "position": [400.0, 0.0], "num_subchannels": 2},
        ],
        "user_counts": [1, 1],
    }
    errors = validate_config_dict(cfg)
    assert any("share" in e and "carrier" in e for e in errors)
    with pytest.raises(ConfigError) as exc:
        ScenarioConfig.from_dict(cfg)
    assert exc.value.errors == errors


def test_config_error_collects_everything():
    cfg = {
        "base_stations": [{"band": "nope", "position": [0.0], "num_subchannels": 0}],
        "user_counts": [1, 2],
    }
    errors = validate_config_dict(cfg)
    assert len(errors) >= 4


def test_explicit_positions_have_all_candidates():
    cfg = {
        "name": "explicit",
        "base_stations": [
            {"band": "fiveg_low", "position": [0.0, 0.0], "num_subchannels": 2},
            {"band": "fiveg_low", "position": [100.0, 0.0], "num_subchannels": 2},
        ],
        "user_positions": [[50.0, 0.0], [340.0, 0.0]],
    }
    scn = build(cfg, 0)
    assert scn.users[0].candidate_bs == (0, 1)
    assert scn.users[1].candidate_bs == (0, 1)
    assert [u.stable_key for u in scn.users] == [(-1, 0), (-1, 1)]


def test_build_scenario_accepts_config_object():
    cfg = ScenarioConfig.from_dict(single_mm_config(2, 3, rows_cols=2))
    scn = build_scenario(cfg, 17)
    assert scn.seed == 17
    assert scn.name == "single_mm"
    assert scn.num_bs == 1 and scn.num_users == 2
