"""Scenario construction: cells, users, reflecting surfaces, fading.

A scenario is a frozen snapshot of one network drop.  All random draws
(user placement, shadowing, small-scale fading, surface fading) happen
here, once, keyed by stable identifiers rather than draw order, so that
adding a base station or user never perturbs the draws of existing ones.
Optimizers treat the scenario as read-only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Optional

import numpy as np

from .bands import DEFAULT_BANDS, BandProfile

# Draw-kind codes folded into the seed entropy.  Never renumber: changing
# a code silently re-rolls every scenario built from the same seed.
_KIND_PLACEMENT = 1
_KIND_SHADOW = 2
_KIND_DIRECT = 3
_KIND_SURFACE_NLOS = 4
_KIND_SURFACE_LOS_PHASE = 5


def _keyed_rng(seed: int, kind: int, *ids: int) -> np.random.Generator:
    """Independent generator for one (seed, kind, ids...) draw site."""
    return np.random.default_rng(np.random.SeedSequence([seed, kind, *ids]))


# Seed entropy must be non-negative; the explicit-placement block -1 maps
# to a sentinel no real base-station index can reach.
_EXPLICIT_BLOCK = 2 ** 31 - 1


def _entropy_block(block: int) -> int:
    return block if block >= 0 else _EXPLICIT_BLOCK


@dataclass(frozen=True)
class RisPanel:
    """Square reflecting surface mounted at its host cell's edge.

    ``rows_cols`` elements per side, spaced ``element_spacing_m`` apart,
    hung on the plane y = host_y - host_radius starting just above the
    ground.  Phases are quantised to ``2**quant_bits`` levels.
    """

    host_bs_id: int
    host_position: tuple[float, float]
    host_radius_m: float
    rows_cols: int = 4
    quant_bits: int = 3
    element_spacing_m: float = 0.005
    rician_factor: float = 4.0
    los_exponent: float = 2.0
    nlos_exponent: float = 2.5

    @property
    def num_elements(self) -> int:
        return self.rows_cols ** 2

    @property
    def phase_levels(self) -> int:
        return 2 ** self.quant_bits


def ris_element_position(panel: RisPanel, l_x: int, l_z: int) -> tuple[float, float, float]:
    """3-D position of element (l_x, l_z), both indices 1-based.

    The row of elements is centred on the host's x coordinate: with d the
    spacing and N the side length, element x runs over
    host_x - d*(N/2 + 1) + d*l_x, the panel sits at y = host_y - radius,
    and element height is d*l_z.
    """
    if not (1 <= l_x <= panel.rows_cols and 1 <= l_z <= panel.rows_cols):
        raise ValueError(f"element index ({l_x}, {l_z}) outside 1..{panel.rows_cols}")
    d = panel.element_spacing_m
    hx, hy = panel.host_position
    x = hx - d * (panel.rows_cols / 2 + 1) + d * l_x
    y = hy - panel.host_radius_m
    z = d * l_z
    return (x, y, z)


def ris_element_grid(panel: RisPanel) -> np.ndarray:
    """(N*N, 3) element positions, row-major: l_x outer, l_z inner."""
    n = panel.rows_cols
    out = np.empty((n * n, 3))
    for lx in range(1, n + 1):
        for lz in range(1, n + 1):
            out[(lx - 1) * n + (lz - 1)] = ris_element_position(panel, lx, lz)
    return out


@dataclass(frozen=True)
class BaseStation:
    bs_id: int
    band: BandProfile
    position: tuple[float, float]
    num_subchannels: int
    panel: Optional[RisPanel] = None


@dataclass(frozen=True)
class User:
    """One uplink user.

    ``stable_key`` identifies the user across config edits (the placement
    block it was drawn in plus its slot there); fading draws key on it so
    enlarging one cell's population re-rolls nobody else.
    """

    user_id: int
    position: tuple[float, float]
    candidate_bs: tuple[int, ...]
    stable_key: tuple[int, int]


@dataclass(frozen=True)
class FadingTable:
    """Frozen fading realization for every (cell, user) link.

    shadow_db[b, u]      lognormal shadowing on the direct link, dB
    direct_power[b, u]   squared magnitude of the unit complex small-scale gain
    surface_los_phase    per directional cell: common phase of the specular
                         surface path per user, radians, shape (U,)
    surface_nlos         per directional cell: scattered unit coefficients,
                         one per (user, element), shape (U, N*N) complex
    """

    shadow_db: np.ndarray
    direct_power: np.ndarray
    surface_los_phase: dict[int, np.ndarray]
    surface_nlos: dict[int, np.ndarray]


@dataclass(frozen=True)
class Scenario:
    seed: int
    name: str
    base_stations: tuple[BaseStation, ...]
    users: tuple[User, ...]
    fading: FadingTable
    blockage_per_meter: float = 0.001        # outage rate of directional links
    interferer_scale: float = 1.0            # multi-user interference weight
    half_power_beamwidth_deg: float = 30.0
    nakagami_nlos: bool = False              # Nakagami(3) magnitudes for surface NLoS
    surface_interference_k0: bool = False    # apply aperture loss to surface interference
    _cache: list = field(default_factory=list, repr=False, compare=False)

    @property
    def num_users(self) -> int:
        return len(self.users)

    @property
    def num_bs(self) -> int:
        return len(self.base_stations)

    def directional_bs_ids(self) -> list[int]:
        return [b.bs_id for b in self.base_stations if b.band.directional]


class CoverageError(ValueError):
    """A user sits outside every cell and uncovered users are not allowed."""

    def __init__(self, user_id: int, position: tuple[float, float]):
        self.user_id = user_id
        super().__init__(f"user {user_id} at {position} is covered by no cell")


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RisDefaults:
    rows_cols: int = 4
    quant_bits: int = 3
    element_spacing_m: float = 0.005
    rician_factor: float = 4.0
    los_exponent: float = 2.0
    nlos_exponent: float = 2.5


@dataclass(frozen=True)
class BaseStationSpec:
    band: str
    position: tuple[float, float]
    num_subchannels: int
    ris: Optional[dict[str, Any]] = None     # overrides of RisDefaults fields


@dataclass(frozen=True)
class ScenarioConfig:
    """Declarative scenario description, JSON round-trippable.

    Users come either from ``user_counts`` (one entry per base station,
    drawn uniformly in that cell's disk) or from explicit
    ``user_positions``.  Exactly one of the two must be set.
    """

    base_stations: tuple[BaseStationSpec, ...]
    user_counts: Optional[tuple[int, ...]] = None
    user_positions: Optional[tuple[tuple[float, float], ...]] = None
    name: str = "scenario"
    band_overrides: dict[str, dict[str, Any]] = field(default_factory=dict)
    ris_defaults: RisDefaults = field(default_factory=RisDefaults)
    allow_uncovered: bool = False
    blockage_per_meter: float = 0.001
    interferer_scale: float = 1.0
    half_power_beamwidth_deg: float = 30.0
    nakagami_nlos: bool = False
    surface_interference_k0: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "band_overrides": self.band_overrides,
            "base_stations": [
                {
                    "band": s.band,
                    "position": list(s.position),
                    "num_subchannels": s.num_subchannels,
                    **({"ris": s.ris} if s.ris is not None else {}),
                }
                for s in self.base_stations
            ],
            "user_counts": list(self.user_counts) if self.user_counts is not None else None,
            "user_positions": [list(p) for p in self.user_positions]
            if self.user_positions is not None
            else None,
            "ris_defaults": {
                "rows_cols": self.ris_defaults.rows_cols,
                "quant_bits": self.ris_defaults.quant_bits,
                "element_spacing_m": self.ris_defaults.element_spacing_m,
                "rician_factor": self.ris_defaults.rician_factor,
                "los_exponent": self.ris_defaults.los_exponent,
                "nlos_exponent": self.ris_defaults.nlos_exponent,
            },
            "allow_uncovered": self.allow_uncovered,
            "blockage_per_meter": self.blockage_per_meter,
            "interferer_scale": self.interferer_scale,
            "half_power_beamwidth_deg": self.half_power_beamwidth_deg,
            "nakagami_nlos": self.nakagami_nlos,
            "surface_interference_k0": self.surface_interference_k0,
        }

    @staticmethod
    def from_dict(raw: dict[str, Any]) -> "ScenarioConfig":
        errors = validate_config_dict(raw)
        if errors:
            raise ConfigError(errors)
        stations = tuple(
            BaseStationSpec(
                band=s["band"],
                position=(float(s["position"][0]), float(s["position"][1])),
                num_subchannels=int(s["num_subchannels"]),
                ris=s.get("ris"),
            )
            for s in raw["base_stations"]
        )
        rd = raw.get("ris_defaults", {})
        defaults = RisDefaults(
            rows_cols=int(rd.get("rows_cols", 4)),
            quant_bits=int(rd.get("quant_bits", 3)),
            element_spacing_m=float(rd.get("element_spacing_m", 0.005)),
            rician_factor=float(rd.get("rician_factor", 4.0)),
            los_exponent=float(rd.get("los_exponent", 2.0)),
            nlos_exponent=float(rd.get("nlos_exponent", 2.5)),
        )
        counts = raw.get("user_counts")
        positions = raw.get("user_positions")
        return ScenarioConfig(
            base_stations=stations,
            user_counts=tuple(int(c) for c in counts) if counts is not None else None,
            user_positions=tuple((float(p[0]), float(p[1])) for p in positions)
            if positions is not None
            else None,
            name=str(raw.get("name", "scenario")),
            band_overrides={k: dict(v) for k, v in raw.get("band_overrides", {}).items()},
            ris_defaults=defaults,
            allow_uncovered=bool(raw.get("allow_uncovered", False)),
            blockage_per_meter=float(raw.get("blockage_per_meter", 0.001)),
            interferer_scale=float(raw.get("interferer_scale", 1.0)),
            half_power_beamwidth_deg=float(raw.get("half_power_beamwidth_deg", 30.0)),
            nakagami_nlos=bool(raw.get("nakagami_nlos", False)),
            surface_interference_k0=bool(raw.get("surface_interference_k0", False)),
        )


class ConfigError(ValueError):
    """Invalid scenario configuration; ``errors`` lists every problem found."""

    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("; ".join(errors))


def validate_config_dict(raw: dict[str, Any]) -> list[str]:
    """All schema violations in a raw config dict, empty when clean."""
    errors: list[str] = []
    if not isinstance(raw, dict):
        return ["config root must be a JSON object"]
    stations = raw.get("base_stations")
    if not isinstance(stations, list) or not stations:
        errors.append("base_stations must be a non-empty list")
        stations = []
    known = set(DEFAULT_BANDS) | set(raw.get("band_overrides", {}) or {})
    for i, s in enumerate(stations):
        if not isinstance(s, dict):
            errors.append(f"base_stations[{i}] must be an object")
            continue
        band = s.get("band")
        if band not in known:
            errors.append(f"base_stations[{i}]: unknown band {band!r}")
        pos = s.get("position")
        if (
            not isinstance(pos, (list, tuple))
            or len(pos) != 2
            or not all(isinstance(c, (int, float)) for c in pos)
        ):
            errors.append(f"base_stations[{i}]: position must be [x, y]")
        nsc = s.get("num_subchannels")
        if not isinstance(nsc, int) or nsc < 1:
            errors.append(f"base_stations[{i}]: num_subchannels must be a positive integer")
        ris = s.get("ris")
        if ris is not None:
            if not isinstance(ris, dict):
                errors.append(f"base_stations[{i}]: ris must be an object")
            else:
                if "rows_cols" in ris and (not isinstance(ris["rows_cols"], int) or ris["rows_cols"] < 1):
                    errors.append(f"base_stations[{i}]: ris.rows_cols must be a positive integer")
                if "quant_bits" in ris and (not isinstance(ris["quant_bits"], int) or ris["quant_bits"] < 1):
                    errors.append(f"base_stations[{i}]: ris.quant_bits must be a positive integer")
    counts = raw.get("user_counts")
    positions = raw.get("user_positions")
    if (counts is None) == (positions is None):
        errors.append("exactly one of user_counts / user_positions must be given")
    if counts is not None:
        if not isinstance(counts, list) or not all(isinstance(c, int) and c >= 0 for c in counts):
            errors.append("user_counts must be a list of non-negative integers")
        elif len(counts) != len(stations):
            errors.append(
                f"user_counts has {len(counts)} entries for {len(stations)} base stations"
            )
    if positions is not None and (
        not isinstance(positions, list)
        or not all(
            isinstance(p, (list, tuple))
            and len(p) == 2
            and all(isinstance(c, (int, float)) for c in p)
            for p in positions
        )
    ):
        errors.append("user_positions must be a list of [x, y] pairs")
    for key in ("blockage_per_meter", "interferer_scale", "half_power_beamwidth_deg"):
        if key in raw and (not isinstance(raw[key], (int, float)) or raw[key] <= 0):
            errors.append(f"{key} must be a positive number")
    rd = raw.get("ris_defaults")
    if rd is not None and not isinstance(rd, dict):
        errors.append("ris_defaults must be an object")
    # Directional cells must not share a carrier, otherwise the same-cell
    # interference model for steered beams breaks down.
    freq_seen: dict[float, int] = {}
    bands = dict(DEFAULT_BANDS)
    for i, s in enumerate(stations):
        if not isinstance(s, dict) or s.get("band") not in bands:
            continue
        prof = bands[s["band"]]
        over = (raw.get("band_overrides") or {}).get(s["band"], {})
        freq = float(over.get("frequency_hz", prof.frequency_hz))
        directional = bool(over.get("directional", prof.directional))
        if directional:
            if freq in freq_seen:
                errors.append(
                    f"base_stations[{i}] and base_stations[{freq_seen[freq]}] share "
                    f"the directional carrier {freq:g} Hz"
                )
            else:
                freq_seen[freq] = i
    return errors


# ---------------------------------------------------------------------------
# construction


def _resolve_band(config: ScenarioConfig, band_id: str) -> BandProfile:
    base = DEFAULT_BANDS[band_id]
    over = config.band_overrides.get(band_id)
    return replace(base, **over) if over else base


def _draw_in_disk(rng: np.random.Generator, center: tuple[float, float], radius: float) -> tuple[float, float]:
    # sqrt keeps the density uniform over area
    r = radius * math.sqrt(rng.uniform())
    phi = rng.uniform(0.0, 2.0 * math.pi)
    return (center[0] + r * math.cos(phi), center[1] + r * math.sin(phi))


def _standard_complex(rng: np.random.Generator, size: int) -> np.ndarray:
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    return (re + 1j * im) / math.sqrt(2.0)


def _nakagami_complex(rng: np.random.Generator, size: int, m: float, omega: float) -> np.ndarray:
    power = rng.gamma(shape=m, scale=omega / m, size=size)
    phase = rng.uniform(0.0, 2.0 * math.pi, size=size)
    return np.sqrt(power) * np.exp(1j * phase)


def build_scenario(config: ScenarioConfig, seed: int) -> Scenario:
    """Materialize one network drop from a config and a master seed.

    Bit-reproducible: the same (config, seed) always yields the same
    scenario, and every random draw is keyed by stable identity so config
    growth (more users, more cells) leaves existing draws untouched.
    """
    stations: list[BaseStation] = []
    for i, spec in enumerate(config.base_stations):
        band = _resolve_band(config, spec.band)
        panel = None
        if band.directional:
            rd = config.ris_defaults
            over = spec.ris or {}
            panel = RisPanel(
                host_bs_id=i,
                host_position=spec.position,
                host_radius_m=band.coverage_radius_m,
                rows_cols=int(over.get("rows_cols", rd.rows_cols)),
                quant_bits=int(over.get("quant_bits", rd.quant_bits)),
                element_spacing_m=float(over.get("element_spacing_m", rd.element_spacing_m)),
                rician_factor=float(over.get("rician_factor", rd.rician_factor)),
                los_exponent=float(over.get("los_exponent", rd.los_exponent)),
                nlos_exponent=float(over.get("nlos_exponent", rd.nlos_exponent)),
            )
        stations.append(
            BaseStation(
                bs_id=i,
                band=band,
                position=spec.position,
                num_subchannels=spec.num_subchannels,
                panel=panel,
            )
        )

    # user placement; stable_key = (placement block, slot within block),
    # explicit positions use block -1
    placed: list[tuple[tuple[float, float], tuple[int, int]]] = []
    if config.user_counts is not None:
        for b, count in enumerate(config.user_counts):
            center = stations[b].position
            radius = stations[b].band.coverage_radius_m
            for slot in range(count):
                rng = _keyed_rng(seed, _KIND_PLACEMENT, b, slot)
                placed.append((_draw_in_disk(rng, center, radius), (b, slot)))
    else:
        assert config.user_positions is not None
        for slot, pos in enumerate(config.user_positions):
            placed.append(((float(pos[0]), float(pos[1])), (-1, slot)))

    users: list[User] = []
    for uid, (pos, key) in enumerate(placed):
        cands = []
        for st in stations:
            dx = pos[0] - st.position[0]
            dy = pos[1] - st.position[1]
            # closed disk: a user exactly on the rim is covered
            if math.hypot(dx, dy) <= st.band.coverage_radius_m:
                cands.append(st.bs_id)
        if not cands and not config.allow_uncovered:
            raise CoverageError(uid, pos)
        users.append(User(user_id=uid, position=pos, candidate_bs=tuple(cands), stable_key=key))

    num_bs, num_users = len(stations), len(users)
    shadow = np.zeros((num_bs, num_users))
    direct = np.zeros((num_bs, num_users))
    for st in stations:
        sigma = st.band.shadow_sigma_db
        for u in users:
            bk, slot = u.stable_key
            bk = _entropy_block(bk)
            rng = _keyed_rng(seed, _KIND_SHADOW, st.bs_id, bk, slot)
            shadow[st.bs_id, u.user_id] = sigma * rng.standard_normal()
            rng = _keyed_rng(seed, _KIND_DIRECT, st.bs_id, bk, slot)
            h0 = _standard_complex(rng, 1)[0]
            direct[st.bs_id, u.user_id] = abs(h0) ** 2

    los_phase: dict[int, np.ndarray] = {}
    nlos: dict[int, np.ndarray] = {}
    for st in stations:
        if st.panel is None:
            continue
        n_el = st.panel.num_elements
        phases = np.zeros(num_users)
        coeffs = np.zeros((num_users, n_el), dtype=complex)
        for u in users:
            bk, slot = u.stable_key
            bk = _entropy_block(bk)
            rng = _keyed_rng(seed, _KIND_SURFACE_LOS_PHASE, st.bs_id, bk, slot)
            phases[u.user_id] = rng.uniform(0.0, 2.0 * math.pi)
            rng = _keyed_rng(seed, _KIND_SURFACE_NLOS, st.bs_id, bk, slot)
            if config.nakagami_nlos:
                coeffs[u.user_id] = _nakagami_complex(rng, n_el, m=3.0, omega=1.0 / 3.0)
            else:
                coeffs[u.user_id] = _standard_complex(rng, n_el)
        los_phase[st.bs_id] = phases
        nlos[st.bs_id] = coeffs

    fading = FadingTable(
        shadow_db=shadow,
        direct_power=direct,
        surface_los_phase=los_phase,
        surface_nlos=nlos,
    )
    return Scenario(
        seed=seed,
        name=config.name,
        base_stations=tuple(stations),
        users=tuple(users),
        fading=fading,
        blockage_per_meter=config.blockage_per_meter,
        interferer_scale=config.interferer_scale,
        half_power_beamwidth_deg=config.half_power_beamwidth_deg,
        nakagami_nlos=config.nakagami_nlos,
        surface_interference_k0=config.surface_interference_k0,
    )


# ---------------------------------------------------------------------------
# serialization


def _band_to_dict(band: BandProfile) -> dict[str, Any]:
    return {
        "band_id": band.band_id,
        "frequency_hz": band.frequency_hz,
        "subchannel_bandwidth_hz": band.subchannel_bandwidth_hz,
        "tx_power_dbm": band.tx_power_dbm,
        "path_loss_exponent": band.path_loss_exponent,
        "shadow_sigma_db": band.shadow_sigma_db,
        "coverage_radius_m": band.coverage_radius_m,
        "directional": band.directional,
        "user_gain_dbi": band.user_gain_dbi,
        "bs_gain_dbi": band.bs_gain_dbi,
        "array_factor": band.array_factor,
        "noise_density_dbm_hz": band.noise_density_dbm_hz,
    }


def scenario_to_dict(scn: Scenario) -> dict[str, Any]:
    """Canonical JSON-able snapshot; complex entries become [re, im]."""
    return {
        "seed": scn.seed,
        "name": scn.name,
        "blockage_per_meter": scn.blockage_per_meter,
        "interferer_scale": scn.interferer_scale,
        "half_power_beamwidth_deg": scn.half_power_beamwidth_deg,
        "nakagami_nlos": scn.nakagami_nlos,
        "surface_interference_k0": scn.surface_interference_k0,
        "base_stations": [
            {
                "bs_id": st.bs_id,
                "band": _band_to_dict(st.band),
                "position": list(st.position),
                "num_subchannels": st.num_subchannels,
                "ris": None
                if st.panel is None
                else {
                    "rows_cols": st.panel.rows_cols,
                    "quant_bits": st.panel.quant_bits,
                    "element_spacing_m": st.panel.element_spacing_m,
                    "rician_factor": st.panel.rician_factor,
                    "los_exponent": st.panel.los_exponent,
                    "nlos_exponent": st.panel.nlos_exponent,
                },
            }
            for st in scn.base_stations
        ],
        "users": [
            {
                "user_id": u.user_id,
                "position": list(u.position),
                "candidate_bs": list(u.candidate_bs),
                "stable_key": list(u.stable_key),
            }
            for u in scn.users
        ],
        "fading": {
            "shadow_db": scn.fading.shadow_db.tolist(),
            "direct_power": scn.fading.direct_power.tolist(),
            "surface_los_phase": {
                str(b): arr.tolist() for b, arr in sorted(scn.fading.surface_los_phase.items())
            },
            "surface_nlos": {
                str(b): [[[z.real, z.imag] for z in row] for row in arr]
                for b, arr in sorted(scn.fading.surface_nlos.items())
            },
        },
    }


def scenario_from_dict(raw: dict[str, Any]) -> Scenario:
    stations = []
    for st in raw["base_stations"]:
        band = BandProfile(**st["band"])
        panel = None
        if st["ris"] is not None:
            panel = RisPanel(
                host_bs_id=st["bs_id"],
                host_position=tuple(st["position"]),
                host_radius_m=band.coverage_radius_m,
                **st["ris"],
            )
        stations.append(
            BaseStation(
                bs_id=st["bs_id"],
                band=band,
                position=tuple(st["position"]),
                num_subchannels=st["num_subchannels"],
                panel=panel,
            )
        )
    users = tuple(
        User(
            user_id=u["user_id"],
            position=tuple(u["position"]),
            candidate_bs=tuple(u["candidate_bs"]),
            stable_key=tuple(u["stable_key"]),
        )
        for u in raw["users"]
    )
    f = raw["fading"]
    fading = FadingTable(
        shadow_db=np.array(f["shadow_db"]),
        direct_power=np.array(f["direct_power"]),
        surface_los_phase={int(b): np.array(v) for b, v in f["surface_los_phase"].items()},
        surface_nlos={
            int(b): np.array([[complex(re, im) for re, im in row] for row in v])
            for b, v in f["surface_nlos"].items()
        },
    )
    return Scenario(
        seed=raw["seed"],
        name=raw["name"],
        base_stations=tuple(stations),
        users=users,
        fading=fading,
        blockage_per_meter=raw["blockage_per_meter"],
        interferer_scale=raw["interferer_scale"],
        half_power_beamwidth_deg=raw["half_power_beamwidth_deg"],
        nakagami_nlos=raw["nakagami_nlos"],
        surface_interference_k0=raw["surface_interference_k0"],
    )


def scenario_to_json(scn: Scenario) -> str:
    return json.dumps(scenario_to_dict(scn), sort_keys=True)
