"""Radio band catalogue for the heterogeneous uplink simulator.

Each band bundles the physical-layer constants of one network tier:
carrier frequency, per-sub-channel bandwidth, user transmit power,
path-loss exponent, antenna gains and coverage radius.  Directional
bands (mmWave and THz) use a steerable-beam gain pattern instead of
fixed gains and carry a reflecting surface on the base station.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class BandProfile:
    """Physical constants of one network tier.

    Gains for non-directional bands are fixed dBi values; directional
    bands compute angle-dependent gains from the beam pattern and leave
    ``user_gain_dbi`` / ``bs_gain_dbi`` unused.
    """

    band_id: str
    frequency_hz: float
    subchannel_bandwidth_hz: float
    tx_power_dbm: float            # user uplink transmit power
    path_loss_exponent: float
    shadow_sigma_db: float         # lognormal shadowing std dev
    coverage_radius_m: float
    directional: bool              # steered beams + reflecting surface + blockage outage
    user_gain_dbi: float = 0.0     # ignored when directional
    bs_gain_dbi: float = 0.0       # ignored when directional
    array_factor: float = 1.0      # small-scale power scale on non-directional links
    noise_density_dbm_hz: float = -174.0

    @property
    def tx_power_w(self) -> float:
        return 10.0 ** ((self.tx_power_dbm - 30.0) / 10.0)

    @property
    def wavelength_m(self) -> float:
        return 299_792_458.0 / self.frequency_hz

    @property
    def noise_power_w(self) -> float:
        """Thermal noise over one sub-channel, in watts."""
        return 10.0 ** ((self.noise_density_dbm_hz - 30.0) / 10.0) * self.subchannel_bandwidth_hz


def _mmwave(band_id: str, freq_ghz: float) -> BandProfile:
    return BandProfile(
        band_id=band_id,
        frequency_hz=freq_ghz * 1e9,
        subchannel_bandwidth_hz=14.4e6,
        tx_power_dbm=21.0,
        path_loss_exponent=2.1,
        shadow_sigma_db=4.0,
        coverage_radius_m=150.0,
        directional=True,
    )


# The four macro/micro tiers plus four mmWave carriers.  Distinct mmWave
# cells use distinct carriers, so mmWave interference never crosses cells.
DEFAULT_BANDS: dict[str, BandProfile] = {
    "fourg": BandProfile(
        band_id="fourg",
        frequency_hz=1.9e9,
        subchannel_bandwidth_hz=1.8e6,
        tx_power_dbm=23.0,
        path_loss_exponent=3.8,
        shadow_sigma_db=8.0,
        coverage_radius_m=1500.0,
        directional=False,
        user_gain_dbi=0.5,
        bs_gain_dbi=13.0,
    ),
    "fiveg_low": BandProfile(
        band_id="fiveg_low",
        frequency_hz=2.5e9,
        subchannel_bandwidth_hz=3.6e6,
        tx_power_dbm=26.0,
        path_loss_exponent=3.8,
        shadow_sigma_db=6.0,
        coverage_radius_m=350.0,
        directional=False,
        user_gain_dbi=3.0,
        bs_gain_dbi=25.0,
    ),
    "fiveg_mid": BandProfile(
        band_id="fiveg_mid",
        frequency_hz=4.8e9,
        subchannel_bandwidth_hz=7.2e6,
        tx_power_dbm=26.0,
        path_loss_exponent=3.0,
        shadow_sigma_db=5.0,
        coverage_radius_m=300.0,
        directional=False,
        user_gain_dbi=3.0,
        bs_gain_dbi=25.0,
    ),
    "mmwave26": _mmwave("mmwave26", 26.0),
    "mmwave27": _mmwave("mmwave27", 27.0),
    "mmwave28": _mmwave("mmwave28", 28.0),
    "mmwave29": _mmwave("mmwave29", 29.0),
    # Sub-THz tier for the wideband variant study.  Same directional
    # machinery as mmWave; coverage radius kept at the small-cell value.
    "thz": BandProfile(
        band_id="thz",
        frequency_hz=0.34e12,
        subchannel_bandwidth_hz=10e9,
        tx_power_dbm=26.0,
        path_loss_exponent=2.0,
        shadow_sigma_db=10.0,
        coverage_radius_m=150.0,
        directional=True,
    ),
}


def band_with_overrides(band_id: str, **overrides) -> BandProfile:
    """Copy of a catalogue band with selected fields replaced."""
    return replace(DEFAULT_BANDS[band_id], **overrides)
