"""Deterministic simulator and optimizers for surface-assisted
multi-band heterogeneous cellular uplinks."""

from .bands import DEFAULT_BANDS, BandProfile
from .channel import (
    beam_gain_db,
    blockage_outage_probability,
    effective_reflect_sum,
    free_space_loss_db,
    path_loss_db,
    peak_beam_gain_db,
    quantized_phase,
    ris_reflect_channel,
    sidelobe_gain_db,
)
from .optimizers import (
    CoalitionState,
    OptimizationResult,
    OptimizerTrace,
    TraversalResult,
    TraversalSizeError,
    baseline_ccga,
    baseline_cga,
    baseline_ra,
    baseline_ro,
    bcd_optimize,
    coalition_game,
    is_nash_stable,
    aligned_phase_indices,
    phase_search,
    phase_search_multistart,
    switch_gain,
    traversal_optimal,
)
from .rates import (
    Assignment,
    InfeasibleAssignmentError,
    PhaseConfig,
    RateReport,
    average_deviation,
    cellular_sinr,
    cochannel_interferers,
    directional_sinr,
    evaluate,
    jain_fairness,
    user_rate,
)
from .scenario import (
    BaseStation,
    ConfigError,
    CoverageError,
    FadingTable,
    RisPanel,
    Scenario,
    ScenarioConfig,
    User,
    build_scenario,
    ris_element_position,
    scenario_from_dict,
    scenario_to_dict,
    validate_config_dict,
)
from .sweeps import SweepSpec, preset_sweep, run_single, run_sweep

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "BandProfile",
    "BaseStation",
    "CoalitionState",
    "ConfigError",
    "CoverageError",
    "DEFAULT_BANDS",
    "FadingTable",
    "InfeasibleAssignmentError",
    "OptimizationResult",
    "OptimizerTrace",
    "PhaseConfig",
    "RateReport",
    "RisPanel",
    "Scenario",
    "ScenarioConfig",
    "SweepSpec",
    "TraversalResult",
    "TraversalSizeError",
    "User",
    "average_deviation",
    "baseline_ccga",
    "baseline_cga",
    "baseline_ra",
    "baseline_ro",
    "bcd_optimize",
    "beam_gain_db",
    "blockage_outage_probability",
    "build_scenario",
    "cellular_sinr",
    "coalition_game",
    "cochannel_interferers",
    "directional_sinr",
    "effective_reflect_sum",
    "evaluate",
    "free_space_loss_db",
    "is_nash_stable",
    "jain_fairness",
    "path_loss_db",
    "peak_beam_gain_db",
    "aligned_phase_indices",
    "phase_search",
    "phase_search_multistart",
    "preset_sweep",
    "quantized_phase",
    "ris_element_position",
    "ris_reflect_channel",
    "run_single",
    "run_sweep",
    "scenario_from_dict",
    "scenario_to_dict",
    "sidelobe_gain_db",
    "switch_gain",
    "traversal_optimal",
    "user_rate",
    "validate_config_dict",
]
