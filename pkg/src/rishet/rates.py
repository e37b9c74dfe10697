"""Uplink rate engine.

Turns a frozen scenario plus an association and surface phase setting
into per-user rates, per-cell utilities and system metrics.  All heavy
geometry (distances, losses, beam collisions, reflect coefficients) is
precomputed once per scenario in a ``LinkBudget`` and reused by every
evaluation, so optimizers can afford millions of small queries.

Interference model:
  * two users collide only on the same carrier frequency and the same
    sub-channel index; cellular tiers collide across cells sharing a
    carrier, steered tiers only within their own cell (carriers of
    directional cells are pairwise distinct by construction)
  * sub-channels inside a cell are dealt round-robin in user-id order
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import channel
from .scenario import Scenario

_LN2 = math.log(2.0)


class InfeasibleAssignmentError(ValueError):
    """Assignment violates coverage or sub-channel bounds for ``user_id``."""

    def __init__(self, user_id: int, reason: str):
        self.user_id = user_id
        self.reason = reason
        super().__init__(f"user {user_id}: {reason}")


@dataclass(frozen=True)
class Assignment:
    """Uplink association: serving cell and sub-channel per user, -1 = none."""

    serving: np.ndarray
    subchannel: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "serving", np.asarray(self.serving, dtype=np.int64))
        object.__setattr__(self, "subchannel", np.asarray(self.subchannel, dtype=np.int64))

    @staticmethod
    def from_serving(scn: Scenario, serving: np.ndarray) -> "Assignment":
        """Derive sub-channels round-robin, in user-id order per cell."""
        serving = np.asarray(serving, dtype=np.int64)
        sub = np.full(len(serving), -1, dtype=np.int64)
        for st in scn.base_stations:
            members = np.flatnonzero(serving == st.bs_id)
            sub[members] = np.arange(len(members)) % st.num_subchannels
        return Assignment(serving=serving, subchannel=sub)

    @staticmethod
    def from_partition(scn: Scenario, partition: dict[int, list[int]]) -> "Assignment":
        serving = np.full(scn.num_users, -1, dtype=np.int64)
        for bs_id, members in partition.items():
            for u in members:
                serving[u] = bs_id
        return Assignment.from_serving(scn, serving)

    def to_dict(self) -> dict:
        return {"serving": self.serving.tolist(), "subchannel": self.subchannel.tolist()}


@dataclass(frozen=True)
class PhaseConfig:
    """Quantised phase index per surface element, keyed by host cell id.

    Arrays are flat (N*N,), row-major over the element lattice.  ``None``
    in APIs that accept an optional config means "no surfaces installed":
    every reflect sum is exactly zero, which no index setting reproduces.
    """

    indices: dict[int, np.ndarray]

    @staticmethod
    def zeros(scn: Scenario) -> "PhaseConfig":
        return PhaseConfig(
            {
                st.bs_id: np.zeros(st.panel.num_elements, dtype=np.int64)
                for st in scn.base_stations
                if st.panel is not None
            }
        )

    @staticmethod
    def random(scn: Scenario, rng: np.random.Generator) -> "PhaseConfig":
        out = {}
        for st in scn.base_stations:
            if st.panel is not None:
                out[st.bs_id] = rng.integers(
                    0, st.panel.phase_levels, size=st.panel.num_elements, dtype=np.int64
                )
        return PhaseConfig(out)

    def copy(self) -> "PhaseConfig":
        return PhaseConfig({b: arr.copy() for b, arr in self.indices.items()})

    def to_dict(self) -> dict:
        return {str(b): arr.tolist() for b, arr in sorted(self.indices.items())}


@dataclass(frozen=True)
class RateReport:
    per_user_rate: np.ndarray      # bit/s, 0 for unassigned users
    per_bs_utility: np.ndarray     # sum of member rates per cell
    sum_rate: float
    fairness: float

    def to_dict(self) -> dict:
        return {
            "sum_rate": self.sum_rate,
            "fairness": self.fairness,
            "per_user_rate": self.per_user_rate.tolist(),
            "per_bs_utility": self.per_bs_utility.tolist(),
        }


def jain_fairness(values: np.ndarray) -> float:
    """Jain index of a utility vector; an all-zero vector counts as fair."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return 1.0
    sq = float(np.sum(x * x))
    if sq == 0.0:
        return 1.0
    return float(np.sum(x)) ** 2 / (x.size * sq)


def average_deviation(optimal: np.ndarray, achieved: np.ndarray) -> float:
    """Mean relative shortfall of ``achieved`` against matched optima."""
    opt = np.asarray(optimal, dtype=float)
    ach = np.asarray(achieved, dtype=float)
    if opt.shape != ach.shape or opt.size == 0:
        raise ValueError("need matched non-empty arrays")
    if np.any(opt <= 0.0):
        raise ValueError("optimal rates must be positive")
    return float(np.mean((opt - ach) / opt))


# ---------------------------------------------------------------------------
# precomputed link budget


class LinkBudget:
    """Static per-scenario tables shared by every rate query."""

    def __init__(self, scn: Scenario):
        self.scenario = scn
        B, U = scn.num_bs, scn.num_users
        pos_u = np.array([u.position for u in scn.users]).reshape(U, 2)
        self.num_subchannels = np.array([st.num_subchannels for st in scn.base_stations])
        self.directional = np.array([st.band.directional for st in scn.base_stations])
        self.noise_w = np.array([st.band.noise_power_w for st in scn.base_stations])
        self.tx_w = np.array([st.band.tx_power_w for st in scn.base_stations])
        self.bandwidth = np.array([st.band.subchannel_bandwidth_hz for st in scn.base_stations])

        self.dist = np.zeros((B, U))
        self.path_gain = np.zeros((B, U))      # linear, shadowing included
        self.cell_rx_w = np.zeros((B, U))      # received power on non-directional cells
        self.direct_amp = np.zeros((B, U))     # sqrt path gain on directional cells
        self.survival = np.ones((B, U))        # blockage survival on directional cells
        self.candidate = np.zeros((B, U), dtype=bool)
        for u in scn.users:
            for b in u.candidate_bs:
                self.candidate[b, u.user_id] = True

        peak_db = channel.peak_beam_gain_db(scn.half_power_beamwidth_deg)
        self.peak_gain = 10.0 ** (peak_db / 10.0)
        self.aperture = np.zeros(B)

        # cells sharing a carrier interfere; map each cell to its peer group
        freq_groups: dict[float, list[int]] = {}
        for st in scn.base_stations:
            freq_groups.setdefault(st.band.frequency_hz, []).append(st.bs_id)
        self.freq_peers = [freq_groups[st.band.frequency_hz] for st in scn.base_stations]
        self.group_mask = np.zeros((B, B), dtype=bool)
        for b in range(B):
            self.group_mask[b, self.freq_peers[b]] = True

        self.pair_gain: dict[int, np.ndarray] = {}
        self.reflect_coeffs: dict[int, np.ndarray] = {}

        for st in scn.base_stations:
            b = st.bs_id
            band = st.band
            delta = pos_u - np.asarray(st.position)
            d = np.hypot(delta[:, 0], delta[:, 1])
            self.dist[b] = d
            shadow = scn.fading.shadow_db[b]
            loss = np.array(
                [
                    channel.path_loss_db(band.frequency_hz, band.path_loss_exponent, d[u], shadow[u])
                    for u in range(U)
                ]
            )
            gain = 10.0 ** (-loss / 10.0)
            self.path_gain[b] = gain
            if band.directional:
                self.direct_amp[b] = np.sqrt(gain)
                self.survival[b] = np.exp(-scn.blockage_per_meter * d)
                self.aperture[b] = channel.aperture_scale(band.wavelength_m)
                self.pair_gain[b] = self._pair_gains(delta, d)
                if st.panel is not None:
                    self.reflect_coeffs[b] = self._panel_coeffs(st, pos_u)
            else:
                g_fixed = 10.0 ** ((band.user_gain_dbi + band.bs_gain_dbi) / 10.0)
                self.cell_rx_w[b] = (
                    band.array_factor
                    * scn.fading.direct_power[b]
                    * g_fixed
                    * gain
                    * band.tx_power_w
                )

    def _pair_gains(self, delta: np.ndarray, d: np.ndarray) -> np.ndarray:
        """Beam-collision gain between served and interfering users at a cell.

        Entry (i, j): transmit gain of user j (aimed straight at this cell)
        times the receive gain of the beam serving user i evaluated at the
        angular offset of user j.  Users co-located with the cell fall back
        to boresight.
        """
        theta_3db = self.scenario.half_power_beamwidth_deg
        safe = np.where(d > 0.0, d, 1.0)
        unit = delta / safe[:, None]
        cosang = np.clip(unit @ unit.T, -1.0, 1.0)
        ang = np.degrees(np.arccos(cosang))
        zero = d == 0.0
        ang[zero, :] = 0.0
        ang[:, zero] = 0.0
        rx = channel.beam_gain_linear(ang, theta_3db)
        return self.peak_gain * rx

    def _panel_coeffs(self, st, pos_u: np.ndarray) -> np.ndarray:
        """(U, N*N) two-hop coefficients from every user via this surface."""
        panel = st.panel
        d_rx = channel.reflect_path_distances(panel, st.position)
        U = pos_u.shape[0]
        out = np.zeros((U, panel.num_elements), dtype=complex)
        nlos = self.scenario.fading.surface_nlos[st.bs_id]
        phases = self.scenario.fading.surface_los_phase[st.bs_id]
        for u in range(U):
            d_tx = channel.reflect_path_distances(panel, tuple(pos_u[u]))
            out[u] = channel.rician_reflect_coeffs(
                d_tx,
                d_rx,
                panel.rician_factor,
                panel.los_exponent,
                panel.nlos_exponent,
                phases[u],
                nlos[u],
            )
        return out

    # -- queries ----------------------------------------------------------

    def reflect_sums(self, phases: Optional[PhaseConfig]) -> Optional[dict[int, np.ndarray]]:
        """Per-cell panel response for every user, or None when disabled."""
        if phases is None:
            return None
        out = {}
        for b, coeffs in self.reflect_coeffs.items():
            idx = phases.indices[b]
            panel = self.scenario.base_stations[b].panel
            q = channel.quantized_phase(idx, panel.quant_bits)
            out[b] = coeffs @ q
        return out

    def cellular_coalition_rates(
        self, bs_id: int, serving: np.ndarray, subch: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """(member ids, rates) for a non-directional cell under the full map."""
        members = np.flatnonzero(serving == bs_id)
        if members.size == 0:
            return members, np.zeros(0)
        in_group = (serving >= 0) & self.group_mask[bs_id][np.clip(serving, 0, None)]
        jj = np.flatnonzero(in_group)
        rx = self.cell_rx_w[bs_id]
        sums = np.bincount(subch[jj], weights=rx[jj], minlength=int(subch[jj].max()) + 1)
        own = rx[members]
        interference = sums[subch[members]] - own
        sinr = own / (interference + self.noise_w[bs_id])
        rates = self.bandwidth[bs_id] * np.log1p(sinr) / _LN2
        return members, rates

    def directional_rates(
        self,
        bs_id: int,
        members: np.ndarray,
        subch_m: np.ndarray,
        reflect_m: Optional[np.ndarray],
    ) -> np.ndarray:
        """Rates of a steered cell's members given their panel responses.

        ``reflect_m`` aligns with ``members``; None = no surface installed.
        """
        m = members.size
        if m == 0:
            return np.zeros(0)
        if reflect_m is None:
            reflect_m = np.zeros(m, dtype=complex)
        k0 = self.aperture[bs_id]
        p = self.tx_w[bs_id]
        amp = self.direct_amp[bs_id, members] + reflect_m
        signal = np.abs(amp) ** 2 * k0 * self.peak_gain ** 2 * p

        same = subch_m[None, :] == subch_m[:, None]
        np.fill_diagonal(same, False)
        g = self.pair_gain[bs_id][np.ix_(members, members)]
        beam_hit = (
            self.scenario.interferer_scale
            * k0
            * p
            * np.sum(same * g * self.path_gain[bs_id, members][None, :], axis=1)
        )
        ris_pow = np.abs(reflect_m) ** 2
        surface_hit = p * np.sum(same * g * ris_pow[None, :], axis=1)
        if self.scenario.surface_interference_k0:
            surface_hit = surface_hit * k0
        sinr = signal / (beam_hit + surface_hit + self.noise_w[bs_id])
        keep = self.survival[bs_id, members]
        return keep * self.bandwidth[bs_id] * np.log1p(sinr) / _LN2

    def coalition_user_rates(
        self,
        bs_id: int,
        serving: np.ndarray,
        subch: np.ndarray,
        reflect: Optional[dict[int, np.ndarray]],
    ) -> tuple[np.ndarray, np.ndarray]:
        if self.directional[bs_id]:
            members = np.flatnonzero(serving == bs_id)
            ref_m = None
            if reflect is not None and bs_id in reflect:
                ref_m = reflect[bs_id][members]
            return members, self.directional_rates(bs_id, members, subch[members], ref_m)
        return self.cellular_coalition_rates(bs_id, serving, subch)


def link_budget(scn: Scenario) -> LinkBudget:
    """Budget for this scenario, built once and memoised on it."""
    if not scn._cache:
        scn._cache.append(LinkBudget(scn))
    return scn._cache[0]


# ---------------------------------------------------------------------------
# public rate queries


def _validate(budget: LinkBudget, assignment: Assignment) -> None:
    scn = budget.scenario
    serving = assignment.serving
    subch = assignment.subchannel
    if serving.shape != (scn.num_users,) or subch.shape != (scn.num_users,):
        raise ValueError("assignment arrays must have one entry per user")
    for u in range(scn.num_users):
        b = int(serving[u])
        if b == -1:
            continue
        if b < 0 or b >= scn.num_bs or not budget.candidate[b, u]:
            raise InfeasibleAssignmentError(u, f"cell {b} does not cover this user")
        s = int(subch[u])
        if s < 0 or s >= budget.num_subchannels[b]:
            raise InfeasibleAssignmentError(
                u, f"sub-channel {s} outside 0..{budget.num_subchannels[b] - 1}"
            )


def cochannel_interferers(scn: Scenario, assignment: Assignment, user_id: int) -> list[int]:
    """Users colliding with this one: same carrier, same sub-channel index,
    and for steered tiers the same cell.  Sorted, excludes the user."""
    budget = link_budget(scn)
    b = int(assignment.serving[user_id])
    if b == -1:
        return []
    s = int(assignment.subchannel[user_id])
    out = []
    for j in range(scn.num_users):
        if j == user_id:
            continue
        bj = int(assignment.serving[j])
        if bj == -1 or int(assignment.subchannel[j]) != s:
            continue
        if budget.directional[b]:
            if bj == b:
                out.append(j)
        elif budget.group_mask[b, bj]:
            out.append(j)
    return out


def cellular_sinr(scn: Scenario, assignment: Assignment, user_id: int) -> float:
    budget = link_budget(scn)
    b = int(assignment.serving[user_id])
    if b == -1 or budget.directional[b]:
        raise ValueError("user is not served by a non-directional cell")
    rx = budget.cell_rx_w[b]
    own = rx[user_id]
    interference = sum(rx[j] for j in cochannel_interferers(scn, assignment, user_id))
    return float(own / (interference + budget.noise_w[b]))


def directional_sinr(
    scn: Scenario, assignment: Assignment, phases: Optional[PhaseConfig], user_id: int
) -> float:
    budget = link_budget(scn)
    b = int(assignment.serving[user_id])
    if b == -1 or not budget.directional[b]:
        raise ValueError("user is not served by a steered cell")
    members = np.flatnonzero(assignment.serving == b)
    reflect = budget.reflect_sums(phases)
    ref_m = reflect[b][members] if reflect is not None and b in reflect else None
    subch_m = assignment.subchannel[members]
    # recover the SINR from the rate path to keep one implementation
    rates = budget.directional_rates(b, members, subch_m, ref_m)
    pos = int(np.flatnonzero(members == user_id)[0])
    keep = budget.survival[b, user_id]
    rate = rates[pos]
    return float(2.0 ** (rate / (keep * budget.bandwidth[b])) - 1.0)


def user_rate(
    scn: Scenario, assignment: Assignment, phases: Optional[PhaseConfig], user_id: int
) -> float:
    """Achieved uplink rate in bit/s; unassigned users get exactly 0."""
    budget = link_budget(scn)
    b = int(assignment.serving[user_id])
    if b == -1:
        return 0.0
    reflect = budget.reflect_sums(phases)
    members, rates = budget.coalition_user_rates(
        b, assignment.serving, assignment.subchannel, reflect
    )
    pos = int(np.flatnonzero(members == user_id)[0])
    return float(rates[pos])


def evaluate(
    scn: Scenario, assignment: Assignment, phases: Optional[PhaseConfig]
) -> RateReport:
    """Full-system rate report; rejects infeasible assignments."""
    budget = link_budget(scn)
    _validate(budget, assignment)
    reflect = budget.reflect_sums(phases)
    per_user = np.zeros(scn.num_users)
    per_bs = np.zeros(scn.num_bs)
    for b in range(scn.num_bs):
        members, r = budget.coalition_user_rates(
            b, assignment.serving, assignment.subchannel, reflect
        )
        per_user[members] = r
        per_bs[b] = r.sum()
    return RateReport(
        per_user_rate=per_user,
        per_bs_utility=per_bs,
        sum_rate=float(per_user.sum()),
        fairness=jain_fairness(per_bs),
    )
