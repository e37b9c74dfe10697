"""Shared instance builders for the test suite."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rishet.scenario import ScenarioConfig, build_scenario

BAND_POOL = ["fourg", "fiveg_low", "fiveg_mid", "mmwave26", "mmwave27", "mmwave28", "mmwave29"]


def single_mm_config(n_users: int, n_subch: int, rows_cols: int, quant_bits: int = 3) -> dict:
    """One steered cell with a panel, users drawn in its disk."""
    return {
        "name": "single_mm",
        "base_stations": [
            {
                "band": "mmwave26",
                "position": [0.0, 0.0],
                "num_subchannels": n_subch,
                "ris": {"rows_cols": rows_cols, "quant_bits": quant_bits},
            }
        ],
        "user_counts": [n_users],
    }


def mixed_three_cell_config() -> dict:
    """Two cells sharing a carrier plus a steered cell with a small panel."""
    return {
        "name": "mixed_three",
        "base_stations": [
            {"band": "fiveg_low", "position": [0.0, 0.0], "num_subchannels": 2},
            {"band": "fiveg_low", "position": [300.0, 0.0], "num_subchannels": 2},
            {
                "band": "mmwave26",
                "position": [-200.0, 0.0],
                "num_subchannels": 2,
                "ris": {"rows_cols": 2},
            },
        ],
        "user_counts": [2, 1, 3],
    }


def cellular_pair_config() -> dict:
    return {
        "name": "cell_pair",
        "base_stations": [
            {"band": "fiveg_low", "position": [0.0, 0.0], "num_subchannels": 2},
            {"band": "fiveg_low", "position": [300.0, 0.0], "num_subchannels": 2},
        ],
        "user_counts": [2, 2],
    }


def random_mixed_config(seed: int) -> dict:
    """Random drop: up to 10 cells of mixed tiers, up to 60 users total.

    Directional carriers are kept pairwise distinct; surplus steered picks
    fall back to a cellular tier.
    """
    gen = np.random.default_rng([seed, 909])
    n_bs = int(gen.integers(2, 11))
    mm_used: list[str] = []
    stations = []
    for _ in range(n_bs):
        band = BAND_POOL[int(gen.integers(0, len(BAND_POOL)))]
        if band.startswith("mmwave"):
            free = [m for m in BAND_POOL[3:] if m not in mm_used]
            if not free:
                band = "fiveg_low"
            else:
                band = free[0]
                mm_used.append(band)
        st = {
            "band": band,
            "position": gen.uniform(-800, 800, size=2).tolist(),
            "num_subchannels": int(gen.integers(2, 7)),
        }
        if band.startswith("mmwave") and gen.random() < 0.5:
            st["ris"] = {"rows_cols": int(gen.integers(2, 5))}
        stations.append(st)
    total = int(gen.integers(n_bs, 61))
    counts = np.bincount(gen.integers(0, n_bs, size=total), minlength=n_bs).tolist()
    return {"name": "random_mixed", "base_stations": stations, "user_counts": counts}


def build(cfg: dict, seed: int):
    return build_scenario(ScenarioConfig.from_dict(cfg), seed)


@pytest.fixture(scope="session")
def mixed_scn():
    return build(mixed_three_cell_config(), 0)
