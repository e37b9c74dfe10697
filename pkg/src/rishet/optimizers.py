"""Association and phase optimizers.

Four layers, all deterministic given a scenario and a seeded generator:

  * a hedonic association game: users switch cells one at a time while a
    strictly positive pairwise utility gain exists
  * a greedy per-element phase search over each cell's reflecting surface
  * their alternating composition, which carries a joint sum-rate that
    never decreases across outer iterations
  * reference baselines (game without surfaces, surfaces without game,
    pure random association, game restricted to non-steered cells) and an
    exhaustive traversal that grounds small instances

Sum rates are bit/s throughout; ``None`` as a phase setting means the
surfaces are absent, which no index configuration can emulate.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import channel
from .rates import (
    Assignment,
    PhaseConfig,
    RateReport,
    evaluate,
    link_budget,
)
from .scenario import Scenario

_LN2 = math.log(2.0)


@dataclass
class OptimizerTrace:
    """Per-iteration progress record of one optimizer run."""

    algorithm: str
    records: list[dict] = field(default_factory=list)
    converged: bool = False
    termination: str = ""
    elapsed_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "records": self.records,
            "converged": self.converged,
            "termination": self.termination,
            "elapsed_s": self.elapsed_s,
        }


@dataclass
class OptimizationResult:
    assignment: Assignment
    phases: Optional[PhaseConfig]
    report: RateReport
    trace: OptimizerTrace


# ---------------------------------------------------------------------------
# association game


class CoalitionState:
    """Mutable association the game edits in place.

    Sub-channels are re-dealt round-robin inside a cell whenever its
    membership changes; the surface phase setting stays frozen for the
    whole game, so each cell's panel response per user is a constant.
    """

    def __init__(
        self,
        scn: Scenario,
        serving: np.ndarray,
        phases: Optional[PhaseConfig],
        candidates: list[tuple[int, ...]],
    ):
        self.scenario = scn
        self.budget = link_budget(scn)
        self.serving = np.asarray(serving, dtype=np.int64).copy()
        self.subch = np.full(scn.num_users, -1, dtype=np.int64)
        self.reflect = self.budget.reflect_sums(phases)
        self.candidates = candidates
        self._utility: dict[int, float] = {}
        for b in range(scn.num_bs):
            self._redeal(b)

    def _redeal(self, bs_id: int) -> None:
        members = np.flatnonzero(self.serving == bs_id)
        self.subch[members] = np.arange(members.size) % self.budget.num_subchannels[bs_id]

    def _invalidate_around(self, bs_id: int) -> None:
        for peer in self.budget.freq_peers[bs_id]:
            self._utility.pop(peer, None)

    def coalition_utility(self, bs_id: int) -> float:
        """Sum rate of one cell's members under the current full map."""
        if bs_id < 0:
            return 0.0
        got = self._utility.get(bs_id)
        if got is None:
            _, rates = self.budget.coalition_user_rates(
                bs_id, self.serving, self.subch, self.reflect
            )
            got = float(rates.sum())
            self._utility[bs_id] = got
        return got

    def system_utility(self) -> float:
        return sum(self.coalition_utility(b) for b in range(self.scenario.num_bs))

    def move(self, user: int, dst: int) -> None:
        src = int(self.serving[user])
        self.serving[user] = dst
        if src >= 0:
            self._redeal(src)
            self._invalidate_around(src)
        if dst >= 0:
            self._redeal(dst)
            self._invalidate_around(dst)
        if dst == -1:
            self.subch[user] = -1

    def assignment(self) -> Assignment:
        return Assignment(serving=self.serving.copy(), subchannel=self.subch.copy())


def switch_gain(state: CoalitionState, user: int, target_bs: int) -> float:
    """Pairwise utility change if ``user`` left its cell for ``target_bs``.

    Measured on the two touched coalitions only, each evaluated under the
    full interference map before and after the hypothetical move.  The
    state is restored before returning.
    """
    src = int(state.serving[user])
    if target_bs == src:
        return 0.0
    before = state.coalition_utility(src) + state.coalition_utility(target_bs)
    state.move(user, target_bs)
    after = state.coalition_utility(src) + state.coalition_utility(target_bs)
    state.move(user, src)
    return after - before


def random_feasible_serving(
    scn: Scenario,
    rng: np.random.Generator,
    candidates: Optional[list[tuple[int, ...]]] = None,
) -> np.ndarray:
    """Uniform independent pick among each user's covering cells."""
    cands = candidates if candidates is not None else [u.candidate_bs for u in scn.users]
    serving = np.full(scn.num_users, -1, dtype=np.int64)
    for u in range(scn.num_users):
        if cands[u]:
            serving[u] = cands[u][int(rng.integers(len(cands[u])))]
    return serving


def _effective_candidates(
    scn: Scenario, candidate_filter: Optional[Callable[[int], bool]]
) -> list[tuple[int, ...]]:
    if candidate_filter is None:
        return [u.candidate_bs for u in scn.users]
    return [tuple(b for b in u.candidate_bs if candidate_filter(b)) for u in scn.users]


def coalition_game(
    scn: Scenario,
    phases: Optional[PhaseConfig] = None,
    init_serving: Optional[np.ndarray] = None,
    rng: Optional[np.random.Generator] = None,
    candidate_filter: Optional[Callable[[int], bool]] = None,
    stall_window: int = 5,
    max_rounds: int = 200,
) -> tuple[Assignment, OptimizerTrace]:
    """Sequential-switch association game under a frozen phase setting.

    Each round visits users in id order; a user takes the admissible
    switch with the largest strictly positive pairwise gain (ties go to
    the lowest cell id, by evaluation order).  A switch can disturb
    third cells sharing a carrier, so the utility may dip transiently;
    the game therefore stops only after ``stall_window`` rounds pass
    without a new system-utility peak.  A round with no switches leaves
    nobody with a positive gain and always stops.
    """
    start = time.perf_counter()
    candidates = _effective_candidates(scn, candidate_filter)
    if init_serving is None:
        if rng is None:
            raise ValueError("need either init_serving or rng")
        init_serving = random_feasible_serving(scn, rng, candidates)
    state = CoalitionState(scn, init_serving, phases, candidates)
    players = [u for u in range(scn.num_users) if candidates[u]]

    peak = state.system_utility()
    rounds_since_peak = 0
    trace = OptimizerTrace(algorithm="coalition_game")
    trace.records.append({"round": 0, "utility": peak, "switches": None})

    for rnd in range(1, max_rounds + 1):
        switches = 0
        for u in players:
            best_gain = 0.0
            best_target = None
            for t in candidates[u]:
                if t == state.serving[u]:
                    continue
                g = switch_gain(state, u, t)
                if g > best_gain:
                    best_gain = g
                    best_target = t
            if best_target is not None:
                state.move(u, best_target)
                switches += 1
        utility = state.system_utility()
        trace.records.append({"round": rnd, "utility": utility, "switches": switches})
        if utility > peak:
            peak = utility
            rounds_since_peak = 0
        else:
            rounds_since_peak += 1
        if switches == 0 or rounds_since_peak >= stall_window:
            trace.converged = True
            trace.termination = "no_further_improvement"
            break
    else:
        trace.termination = "round_cap"
    trace.elapsed_s = time.perf_counter() - start
    return state.assignment(), trace


def is_nash_stable(
    scn: Scenario,
    assignment: Assignment,
    phases: Optional[PhaseConfig] = None,
    candidate_filter: Optional[Callable[[int], bool]] = None,
) -> bool:
    """No user has a strictly positive switch left."""
    candidates = _effective_candidates(scn, candidate_filter)
    state = CoalitionState(scn, assignment.serving, phases, candidates)
    for u in range(scn.num_users):
        for t in candidates[u]:
            if t != state.serving[u] and switch_gain(state, u, t) > 0.0:
                return False
    return True


# ---------------------------------------------------------------------------
# phase search


def _panel_rate_fn(budget, bs_id: int, members: np.ndarray, subch_m: np.ndarray):
    """Batched coalition-rate objective of one steered cell.

    Returns f taking (L, m) panel responses (one row per candidate) and
    yielding the L coalition sum rates.  Everything independent of the
    responses is folded into constants up front.
    """
    scn = budget.scenario
    k0 = budget.aperture[bs_id]
    p = budget.tx_w[bs_id]
    d_amp = budget.direct_amp[bs_id, members]
    same = subch_m[None, :] == subch_m[:, None]
    np.fill_diagonal(same, False)
    g = budget.pair_gain[bs_id][np.ix_(members, members)] * same
    beam_hit = (
        scn.interferer_scale * k0 * p * (g @ budget.path_gain[bs_id, members])
    )
    surface_scale = p * (k0 if scn.surface_interference_k0 else 1.0)
    denom_const = beam_hit + budget.noise_w[bs_id]
    sig_scale = k0 * budget.peak_gain ** 2 * p
    keep_w = budget.survival[bs_id, members] * budget.bandwidth[bs_id] / _LN2

    def f(amat: np.ndarray) -> np.ndarray:
        shifted = d_amp[None, :] + amat
        sig = (shifted.real ** 2 + shifted.imag ** 2) * sig_scale
        pw = amat.real ** 2 + amat.imag ** 2
        sur = pw @ g.T * surface_scale
        sinr = sig / (sur + denom_const[None, :])
        return np.log1p(sinr) @ keep_w

    return f


def _ascend_panel(panel, coeffs, phasors, f, idx, eps, max_sweeps):
    """Coordinate ascent over one surface's levels, in place on ``idx``.

    Returns (start_rate, end_rate, sweeps, converged) where rates are the
    host cell's coalition sum rates.
    """
    amp = coeffs @ phasors[idx]
    rate = float(f(amp[None, :])[0])
    start_rate = rate
    converged = False
    sweeps = 0
    while sweeps < max_sweeps:
        rate_before = rate
        for k in range(panel.num_elements):
            col = coeffs[:, k]
            trial = amp[None, :] + np.outer(phasors - phasors[idx[k]], col)
            rates = f(trial)
            best = int(np.argmax(rates))     # first max: lowest level wins ties
            if best != idx[k]:
                amp = trial[best]
                idx[k] = best
            rate = float(rates[best])
        sweeps += 1
        # refresh against accumulated increments before judging the sweep
        amp = coeffs @ phasors[idx]
        rate = float(f(amp[None, :])[0])
        if abs(rate - rate_before) < eps:
            converged = True
            break
    return start_rate, rate, sweeps, converged


def phase_search(
    scn: Scenario,
    assignment: Assignment,
    phases_init: Optional[PhaseConfig] = None,
    eps: float = 1e-3,
    max_sweeps: int = 50,
) -> tuple[PhaseConfig, OptimizerTrace]:
    """Greedy per-element quantised phase search, one surface at a time.

    Elements are visited row-major; each tries every level and keeps the
    best coalition sum rate of its host cell (ties to the lowest level).
    A surface stops when a full sweep moves its rate by less than ``eps``
    bit/s.  Surfaces of empty cells reset to level 0.  Each accepted step
    improves its own cell and touches nobody else, so the system sum rate
    never decreases.
    """
    start = time.perf_counter()
    budget = link_budget(scn)
    phases = phases_init.copy() if phases_init is not None else PhaseConfig.zeros(scn)
    trace = OptimizerTrace(algorithm="phase_search")

    for st in scn.base_stations:
        if st.panel is None:
            continue
        b = st.bs_id
        panel = st.panel
        members = np.flatnonzero(assignment.serving == b)
        if members.size == 0:
            phases.indices[b][:] = 0
            trace.records.append(
                {"bs_id": b, "sweeps": 0, "start_rate": 0.0, "end_rate": 0.0, "converged": True}
            )
            continue
        coeffs = budget.reflect_coeffs[b][members]      # (m, E)
        f = _panel_rate_fn(budget, b, members, assignment.subchannel[members])
        phasors = channel.quantized_phase(np.arange(panel.phase_levels), panel.quant_bits)
        start_rate, rate, sweeps, converged = _ascend_panel(
            panel, coeffs, phasors, f, phases.indices[b], eps, max_sweeps
        )
        trace.records.append(
            {
                "bs_id": b,
                "sweeps": sweeps,
                "start_rate": start_rate,
                "end_rate": rate,
                "converged": converged,
            }
        )
    trace.converged = all(r["converged"] for r in trace.records) if trace.records else True
    trace.termination = "sweep_delta" if trace.converged else "sweep_cap"
    trace.elapsed_s = time.perf_counter() - start
    return phases, trace


def aligned_phase_indices(scn: Scenario, assignment: Assignment, bs_id: int) -> np.ndarray:
    """Matched-phase seed for one surface.

    Picks, per element, the level with the largest direct-weighted matched
    response summed over the cell's members.  With a single member this is
    the classic per-element alignment of the reflected path onto the direct
    one; with several it seeds a compromise that the sweep then refines.
    """
    budget = link_budget(scn)
    panel = scn.base_stations[bs_id].panel
    if panel is None:
        raise ValueError(f"base station {bs_id} has no reflecting surface")
    members = np.flatnonzero(assignment.serving == bs_id)
    if members.size == 0:
        return np.zeros(panel.num_elements, dtype=np.int64)
    phasors = channel.quantized_phase(np.arange(panel.phase_levels), panel.quant_bits)
    coeffs = budget.reflect_coeffs[bs_id][members]
    d_amp = budget.direct_amp[bs_id, members]
    score = np.real(np.einsum("m,mk,l->kl", d_amp, coeffs, phasors))
    return np.argmax(score, axis=1).astype(np.int64)


def phase_search_multistart(
    scn: Scenario,
    assignment: Assignment,
    phases_init: Optional[PhaseConfig] = None,
    eps: float = 1e-3,
    max_sweeps: int = 50,
    bs_ids: Optional[tuple[int, ...]] = None,
) -> tuple[PhaseConfig, OptimizerTrace]:
    """Per-element search restarted from every common rotation of the seed.

    The sweep accepts only single-level moves, so a surface whose start is
    coherent but misaligned with the direct path can sit on a ridge where
    every one-element change decoheres the panel and loses rate.  The ridge
    is exactly the family of common rotations, so each surface is ascended
    once per rotation of its matched-phase seed (plus ``phases_init`` when
    given) and the best endpoint wins.  Cells interfere only with their own
    members, so surfaces are screened independently.
    """
    start = time.perf_counter()
    budget = link_budget(scn)
    phases = PhaseConfig.zeros(scn)
    trace = OptimizerTrace(algorithm="phase_search_multistart")

    for st in scn.base_stations:
        if st.panel is None or (bs_ids is not None and st.bs_id not in bs_ids):
            continue
        b = st.bs_id
        panel = st.panel
        members = np.flatnonzero(assignment.serving == b)
        if members.size == 0:
            trace.records.append(
                {"bs_id": b, "starts": 0, "sweeps": 0, "start_rate": 0.0,
                 "end_rate": 0.0, "converged": True}
            )
            continue
        coeffs = budget.reflect_coeffs[b][members]
        f = _panel_rate_fn(budget, b, members, assignment.subchannel[members])
        levels = panel.phase_levels
        phasors = channel.quantized_phase(np.arange(levels), panel.quant_bits)
        base = aligned_phase_indices(scn, assignment, b)
        starts = [(base + m) % levels for m in range(levels)]
        if phases_init is not None and b in phases_init.indices:
            extra = np.asarray(phases_init.indices[b], dtype=np.int64)
            if not any(np.array_equal(extra, s) for s in starts):
                starts.append(extra)
        best = None
        total_sweeps = 0
        all_converged = True
        for start_idx in starts:
            idx = start_idx.copy()
            s_rate, e_rate, sweeps, converged = _ascend_panel(
                panel, coeffs, phasors, f, idx, eps, max_sweeps
            )
            total_sweeps += sweeps
            all_converged = all_converged and converged
            if best is None or e_rate > best[1]:
                best = (idx, e_rate, s_rate)
        phases.indices[b][:] = best[0]
        trace.records.append(
            {
                "bs_id": b,
                "starts": len(starts),
                "sweeps": total_sweeps,
                "start_rate": best[2],
                "end_rate": best[1],
                "converged": all_converged,
            }
        )
    trace.converged = all(r["converged"] for r in trace.records) if trace.records else True
    trace.termination = "sweep_delta" if trace.converged else "sweep_cap"
    trace.elapsed_s = time.perf_counter() - start
    return phases, trace


def exhaustive_phase_argmax(
    scn: Scenario, assignment: Assignment, bs_id: int, max_configs: int = 10_000_000
) -> tuple[np.ndarray, float]:
    """Global optimum of one surface by full enumeration; ground truth only.

    Returns (indices, coalition rate).  Ties resolve to the first setting
    in ascending mixed-radix order, matching the greedy search's rule.
    """
    budget = link_budget(scn)
    st = scn.base_stations[bs_id]
    panel = st.panel
    members = np.flatnonzero(assignment.serving == bs_id)
    levels = panel.phase_levels
    total = levels ** panel.num_elements
    if total > max_configs:
        raise ValueError(f"{total} settings exceed the enumeration limit {max_configs}")
    if members.size == 0:
        return np.zeros(panel.num_elements, dtype=np.int64), 0.0
    coeffs = budget.reflect_coeffs[bs_id][members]
    f = _panel_rate_fn(budget, bs_id, members, assignment.subchannel[members])
    phasors = channel.quantized_phase(np.arange(levels), panel.quant_bits)
    best_idx, best_rate = None, -np.inf
    # batch the innermost element to keep enumeration vectorised
    e = panel.num_elements
    for head in itertools.product(range(levels), repeat=e - 1):
        base = coeffs[:, : e - 1] @ phasors[list(head)] if e > 1 else np.zeros(members.size, dtype=complex)
        trial = base[None, :] + np.outer(phasors, coeffs[:, e - 1])
        rates = f(trial)
        k = int(np.argmax(rates))
        if rates[k] > best_rate:
            best_rate = float(rates[k])
            best_idx = np.array(list(head) + [k], dtype=np.int64)
    return best_idx, best_rate


# ---------------------------------------------------------------------------
# alternating composition


def bcd_optimize(
    scn: Scenario,
    rng: np.random.Generator,
    xi: float = 3e-3,
    eps: float = 1e-3,
    max_outer: int = 50,
    stall_window: int = 5,
    max_rounds: int = 200,
) -> OptimizationResult:
    """Alternate the association game and the phase search from a random start.

    Stops when the joint sum rate's relative change over one outer
    iteration falls below ``xi``.  The game's proposal is only adopted
    when it does not lower the joint rate under the current phases, so
    the outer sum-rate sequence is non-decreasing exactly.
    """
    start = time.perf_counter()
    serving = random_feasible_serving(scn, rng)
    assignment = Assignment.from_serving(scn, serving)
    phases = PhaseConfig.random(scn, rng)
    r_prev = evaluate(scn, assignment, phases).sum_rate

    trace = OptimizerTrace(algorithm="bcd")
    trace.records.append({"outer": 0, "sum_rate": r_prev})

    for outer in range(1, max_outer + 1):
        proposal, game_trace = coalition_game(
            scn,
            phases=phases,
            init_serving=assignment.serving,
            stall_window=stall_window,
            max_rounds=max_rounds,
        )
        r_proposal = evaluate(scn, proposal, phases).sum_rate
        adopted = r_proposal >= r_prev
        if adopted:
            assignment = proposal
        phases, search_trace = phase_search_multistart(
            scn, assignment, phases_init=phases, eps=eps
        )
        r_new = evaluate(scn, assignment, phases).sum_rate
        trace.records.append(
            {
                "outer": outer,
                "sum_rate": r_new,
                "association_adopted": adopted,
                "game_rounds": len(game_trace.records) - 1,
                "search_sweeps": sum(rec["sweeps"] for rec in search_trace.records),
            }
        )
        if r_new == r_prev == 0.0:
            trace.converged = True
            trace.termination = "degenerate_zero_rate"
            break
        if r_prev > 0.0 and abs(r_new - r_prev) / r_prev < xi:
            trace.converged = True
            trace.termination = "relative_delta"
            break
        r_prev = r_new
    else:
        trace.termination = "outer_cap"
    trace.elapsed_s = time.perf_counter() - start
    return OptimizationResult(assignment, phases, evaluate(scn, assignment, phases), trace)


# ---------------------------------------------------------------------------
# baselines


def baseline_cga(
    scn: Scenario, rng: np.random.Generator, **game_kwargs
) -> OptimizationResult:
    """Association game with every reflecting surface absent."""
    assignment, trace = coalition_game(scn, phases=None, rng=rng, **game_kwargs)
    trace.algorithm = "baseline_cga"
    return OptimizationResult(assignment, None, evaluate(scn, assignment, None), trace)


def baseline_ro(
    scn: Scenario, rng: np.random.Generator, eps: float = 1e-3
) -> OptimizationResult:
    """One random feasible association, surfaces optimised, nothing else."""
    start = time.perf_counter()
    assignment = Assignment.from_serving(scn, random_feasible_serving(scn, rng))
    phases, trace = phase_search(scn, assignment, phases_init=PhaseConfig.random(scn, rng), eps=eps)
    trace.algorithm = "baseline_ro"
    trace.elapsed_s = time.perf_counter() - start
    return OptimizationResult(assignment, phases, evaluate(scn, assignment, phases), trace)


def baseline_ra(
    scn: Scenario, rng: np.random.Generator, draws: int = 100
) -> OptimizationResult:
    """Average outcome of many random associations without surfaces.

    The report carries the element-wise mean over all draws; the returned
    assignment is the final draw, kept for reproducibility rather than
    merit.
    """
    start = time.perf_counter()
    sum_rates = np.zeros(draws)
    fair = np.zeros(draws)
    per_user = np.zeros(scn.num_users)
    per_bs = np.zeros(scn.num_bs)
    assignment = None
    for i in range(draws):
        assignment = Assignment.from_serving(scn, random_feasible_serving(scn, rng))
        rep = evaluate(scn, assignment, None)
        sum_rates[i] = rep.sum_rate
        fair[i] = rep.fairness
        per_user += rep.per_user_rate
        per_bs += rep.per_bs_utility
    report = RateReport(
        per_user_rate=per_user / draws,
        per_bs_utility=per_bs / draws,
        sum_rate=float(sum_rates.mean()),
        fairness=float(fair.mean()),
    )
    trace = OptimizerTrace(
        algorithm="baseline_ra",
        records=[{"draws": draws, "sum_rate_std": float(sum_rates.std())}],
        converged=True,
        termination="draws_exhausted",
        elapsed_s=time.perf_counter() - start,
    )
    return OptimizationResult(assignment, None, report, trace)


def baseline_ccga(
    scn: Scenario, rng: np.random.Generator, **game_kwargs
) -> OptimizationResult:
    """Association game with steered cells struck off every candidate list.

    Users covered only by steered cells stay unassigned at rate zero.
    """
    budget = link_budget(scn)
    keep = lambda b: not budget.directional[b]  # noqa: E731
    assignment, trace = coalition_game(
        scn, phases=None, rng=rng, candidate_filter=keep, **game_kwargs
    )
    trace.algorithm = "baseline_ccga"
    return OptimizationResult(assignment, None, evaluate(scn, assignment, None), trace)


# ---------------------------------------------------------------------------
# exhaustive traversal


class TraversalSizeError(ValueError):
    """The association space is larger than the enumeration budget."""

    def __init__(self, size: int, limit: int):
        self.size = size
        self.limit = limit
        super().__init__(f"{size} associations exceed the traversal limit {limit}")


@dataclass
class TraversalResult:
    assignment: Assignment
    phases: Optional[PhaseConfig]
    report: RateReport
    enumerated: int
    elapsed_s: float


def traversal_optimal(
    scn: Scenario,
    max_enum: int = 1_000_000,
    phase_mode: str = "local",
    eps: float = 1e-3,
) -> TraversalResult:
    """Ground truth by brute force over every feasible association.

    Each association is scored after a fresh surface optimisation:
    ``local`` runs the greedy search restarted from every common rotation
    of the matched-phase seed, ``exhaustive`` enumerates each surface
    fully, ``off`` scores without surfaces.  Ties keep the first
    association in lexicographic candidate order.
    """
    if phase_mode not in ("local", "exhaustive", "off"):
        raise ValueError(f"unknown phase_mode {phase_mode!r}")
    start = time.perf_counter()
    cand_lists = [list(u.candidate_bs) for u in scn.users]
    covered = [u for u in range(scn.num_users) if cand_lists[u]]
    size = 1
    for u in covered:
        size *= len(cand_lists[u])
        if size > max_enum:
            raise TraversalSizeError(size, max_enum)

    best = None
    count = 0
    serving = np.full(scn.num_users, -1, dtype=np.int64)
    # a surface's optimum depends only on its cell's members and their
    # subchannels, which repeat across associations, so cache per coalition
    panel_cache: dict[tuple, np.ndarray] = {}

    def panel_indices(b: int, assignment: Assignment) -> np.ndarray:
        members = np.flatnonzero(assignment.serving == b)
        key = (b, members.tobytes(), assignment.subchannel[members].tobytes())
        idx = panel_cache.get(key)
        if idx is None:
            if phase_mode == "local":
                found, _ = phase_search_multistart(scn, assignment, eps=eps, bs_ids=(b,))
                idx = found.indices[b]
            else:
                idx, _ = exhaustive_phase_argmax(scn, assignment, b)
            panel_cache[key] = idx
        return idx

    for combo in itertools.product(*(cand_lists[u] for u in covered)):
        count += 1
        serving[covered] = combo
        assignment = Assignment.from_serving(scn, serving.copy())
        if phase_mode == "off":
            phases = None
        else:
            phases = PhaseConfig.zeros(scn)
            for b in scn.directional_bs_ids():
                phases.indices[b][:] = panel_indices(b, assignment)
        report = evaluate(scn, assignment, phases)
        if best is None or report.sum_rate > best[2].sum_rate:
            best = (assignment, phases, report)
    if best is None:
        raise ValueError("scenario has no covered users to enumerate")
    return TraversalResult(
        assignment=best[0],
        phases=best[1],
        report=best[2],
        enumerated=count,
        elapsed_s=time.perf_counter() - start,
    )
