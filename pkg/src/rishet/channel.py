"""Propagation primitives: losses, beam patterns, reflect paths, blockage.

Everything here is a pure function of geometry, band constants and
pre-drawn fading values.  Distances are metres, frequencies Hz, gains dB
unless a name says otherwise.
"""

from __future__ import annotations

import math

import numpy as np

from .scenario import RisPanel, ris_element_grid

# Links shorter than the reference distance are clamped up to it; the
# counter surfaces degenerate co-location in tests and long runs.
_clamp_events = 0


def clamp_event_count() -> int:
    return _clamp_events


def reset_clamp_event_count() -> None:
    global _clamp_events
    _clamp_events = 0


def free_space_loss_db(frequency_hz: float, distance_m: float) -> float:
    """Free-space loss, evaluated in the MHz/km form of the constant 32.45."""
    f_mhz = frequency_hz / 1e6
    d_km = distance_m / 1e3
    return 32.45 + 20.0 * math.log10(f_mhz) + 20.0 * math.log10(d_km)


def path_loss_db(
    frequency_hz: float,
    exponent: float,
    distance_m: float,
    shadow_db: float = 0.0,
    ref_distance_m: float = 1.0,
) -> float:
    """Log-distance loss: free-space to the 1 m reference, then slope 10n."""
    global _clamp_events
    if distance_m < ref_distance_m:
        _clamp_events += 1
        distance_m = ref_distance_m
    return (
        free_space_loss_db(frequency_hz, ref_distance_m)
        + 10.0 * exponent * math.log10(distance_m / ref_distance_m)
        + shadow_db
    )


def path_gain_linear(
    frequency_hz: float,
    exponent: float,
    distance_m: float,
    shadow_db: float = 0.0,
    ref_distance_m: float = 1.0,
) -> float:
    return 10.0 ** (-path_loss_db(frequency_hz, exponent, distance_m, shadow_db, ref_distance_m) / 10.0)


# ---------------------------------------------------------------------------
# steered-beam antenna pattern


def peak_beam_gain_db(theta_3db_deg: float) -> float:
    half = math.radians(theta_3db_deg) / 2.0
    return 10.0 * math.log10((1.6162 / math.sin(half)) ** 2)


def sidelobe_gain_db(theta_3db_deg: float) -> float:
    # the beamwidth enters this fit in degrees
    return -0.4111 * math.log(theta_3db_deg) - 10.579


def main_lobe_width_deg(theta_3db_deg: float) -> float:
    return 2.6 * theta_3db_deg


def beam_gain_db(theta_deg: float, theta_3db_deg: float) -> float:
    """Gain at off-boresight angle theta_deg >= 0.

    Quadratic roll-off from the peak inside the main lobe (boundary angle
    included), flat side-lobe floor outside.
    """
    if theta_deg < 0.0:
        raise ValueError("off-boresight angle must be non-negative")
    if theta_deg <= main_lobe_width_deg(theta_3db_deg) / 2.0:
        return peak_beam_gain_db(theta_3db_deg) - 3.01 * (2.0 * theta_deg / theta_3db_deg) ** 2
    return sidelobe_gain_db(theta_3db_deg)


def beam_gain_linear(theta_deg: np.ndarray | float, theta_3db_deg: float) -> np.ndarray | float:
    """Vectorised linear-scale beam gain."""
    theta = np.asarray(theta_deg, dtype=float)
    peak = peak_beam_gain_db(theta_3db_deg)
    side = sidelobe_gain_db(theta_3db_deg)
    in_lobe = theta <= main_lobe_width_deg(theta_3db_deg) / 2.0
    db = np.where(in_lobe, peak - 3.01 * (2.0 * theta / theta_3db_deg) ** 2, side)
    out = 10.0 ** (db / 10.0)
    return out if out.shape else float(out)


def aperture_scale(wavelength_m: float) -> float:
    """Linear power scale (lambda / 4 pi)^2 of an isotropic aperture."""
    return (wavelength_m / (4.0 * math.pi)) ** 2


# ---------------------------------------------------------------------------
# blockage


def blockage_outage_probability(distance_m: float, rate_per_meter: float) -> float:
    """Probability that a directional link of this length is blocked."""
    return 1.0 - math.exp(-rate_per_meter * distance_m)


def blockage_survival(distance_m: float, rate_per_meter: float) -> float:
    return math.exp(-rate_per_meter * distance_m)


# ---------------------------------------------------------------------------
# reflecting surface paths


def quantized_phase(index: int | np.ndarray, quant_bits: int) -> complex | np.ndarray:
    """Unit phasor of a quantised phase index.

    Levels sit at 2 pi m / (2^e - 1) for m in 0 .. 2^e - 1, so the first
    and last index coincide on the circle; with one bit both collapse to
    the identity.
    """
    levels = 2 ** quant_bits
    m = np.asarray(index)
    if np.any(m < 0) or np.any(m >= levels):
        raise ValueError(f"phase index outside 0..{levels - 1}")
    out = np.exp(1j * 2.0 * math.pi * m / (levels - 1)) if levels > 1 else np.ones_like(
        m, dtype=complex
    )
    # one quantisation bit still yields indices {0, 1} but both land on 1+0j
    if np.ndim(index) == 0:
        return complex(out)
    return out


def reflect_path_distances(
    panel: RisPanel,
    endpoint_xy: tuple[float, float],
) -> np.ndarray:
    """Distance from a ground endpoint to every element, row-major (N*N,)."""
    grid = ris_element_grid(panel)
    dx = endpoint_xy[0] - grid[:, 0]
    dy = endpoint_xy[1] - grid[:, 1]
    return np.sqrt(dx * dx + dy * dy + grid[:, 2] * grid[:, 2])


def rician_reflect_coeffs(
    d_tx: np.ndarray,
    d_rx: np.ndarray,
    rician_factor: float,
    los_exponent: float,
    nlos_exponent: float,
    los_phase: float,
    nlos_draws: np.ndarray,
) -> np.ndarray:
    """Per-element two-hop coefficients of one transmitter/receiver pair.

    The specular part decays with the product of hop distances at the
    line-of-sight exponent and carries one common phase for the whole
    panel; the scattered part decays at the diffuse exponent and carries
    the pre-drawn unit coefficients.
    """
    k = rician_factor
    los = (d_tx * d_rx) ** (-los_exponent / 2.0) * np.exp(-1j * los_phase)
    nlos = (d_tx * d_rx) ** (-nlos_exponent / 2.0) * nlos_draws
    return math.sqrt(k / (1.0 + k)) * los + math.sqrt(1.0 / (1.0 + k)) * nlos


def ris_reflect_channel(
    panel: RisPanel,
    l_x: int,
    l_z: int,
    tx_xy: tuple[float, float],
    rx_xy: tuple[float, float],
    los_phase: float,
    nlos_draw: complex,
) -> complex:
    """Two-hop coefficient of a single element, indices 1-based."""
    n = panel.rows_cols
    flat = (l_x - 1) * n + (l_z - 1)
    d_tx = reflect_path_distances(panel, tx_xy)[flat]
    d_rx = reflect_path_distances(panel, rx_xy)[flat]
    return complex(
        rician_reflect_coeffs(
            np.array([d_tx]),
            np.array([d_rx]),
            panel.rician_factor,
            panel.los_exponent,
            panel.nlos_exponent,
            los_phase,
            np.array([nlos_draw]),
        )[0]
    )


def effective_reflect_sum(
    coeffs: np.ndarray,
    phase_indices: np.ndarray,
    quant_bits: int,
) -> complex:
    """Panel response: coefficients weighted by their quantised phasors."""
    q = quantized_phase(np.asarray(phase_indices), quant_bits)
    return complex(np.sum(coeffs * q))
