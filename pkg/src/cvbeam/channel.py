"""Line-of-sight THz link: path loss, rank-1 channel, RSRP, SNR/rate and
distance-based transmit power control."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .array import ArrayGeometry, BeamWeights, upa_response, direction_cosines
from .errors import DimensionMismatchError, DomainError
from .geometry import SphericalPoint

THERMAL_NOISE_DBM_PER_HZ = -174.0
RSRP_FLOOR_DBM = -300.0
PATHLOSS_MIN_DISTANCE_M = 1.0


@dataclass(frozen=True)
class LinkBudget:
    carrier_hz: float = 1.0e11
    bandwidth_hz: float = 1.0e9
    tx_power_dbm_max: float = 30.0
    tx_power_dbm_min: float = -10.0
    noise_figure_db: float = 7.0
    thermal_noise_dbm_per_hz: float = THERMAL_NOISE_DBM_PER_HZ

    def __post_init__(self):
        if not (self.carrier_hz > 0 and self.bandwidth_hz > 0):
            raise DomainError("carrier and bandwidth must be positive")
        if not (math.isfinite(self.tx_power_dbm_max) and math.isfinite(self.tx_power_dbm_min)):
            raise DomainError("transmit power limits must be finite")
        if self.tx_power_dbm_min > self.tx_power_dbm_max:
            raise DomainError("tx_power_dbm_min exceeds tx_power_dbm_max")

    @property
    def noise_dbm(self) -> float:
        return self.thermal_noise_dbm_per_hz + 10 * math.log10(self.bandwidth_hz) + self.noise_figure_db


@dataclass(frozen=True)
class ChannelRealization:
    matrix: np.ndarray
    aod: SphericalPoint
    aoa: SphericalPoint
    pathloss_db: float


def pathloss_inh_los(distance_m: float, carrier_hz: float) -> float:
    """TR 38.901 InH-Office LoS path loss in dB; distances under 1 m are clamped."""
    if not distance_m > 0:
        raise DomainError(f"distance must be positive, got {distance_m}")
    if not carrier_hz > 0:
        raise DomainError(f"carrier must be positive, got {carrier_hz}")
    d = max(distance_m, PATHLOSS_MIN_DISTANCE_M)
    return 32.4 + 17.3 * math.log10(d) + 20.0 * math.log10(carrier_hz / 1e9)


BORESIGHT = SphericalPoint(1.0, 0.0, 0.0)


def los_channel(
    geom_t: ArrayGeometry,
    geom_r: ArrayGeometry,
    mobile: SphericalPoint,
    budget: LinkBudget,
    aoa: SphericalPoint = BORESIGHT,
) -> ChannelRealization:
    """Rank-1 LoS channel ``H = g * a_r a_t^H / sqrt(Nt Nr)``.

    ``mobile`` gives the departure direction and the range. The mobile's
    array faces the BS by default, so the arrival direction is its boresight.
    """
    pl = pathloss_inh_los(mobile.r, budget.carrier_hz)
    a_t = upa_response(geom_t, *direction_cosines(mobile.theta, mobile.phi))
    a_r = upa_response(geom_r, *direction_cosines(aoa.theta, aoa.phi))
    n_t, n_r = geom_t.n_elements, geom_r.n_elements
    g = math.sqrt(n_t * n_r * 10 ** (-pl / 10))
    h = g * np.outer(a_r, a_t.conj()) / math.sqrt(n_t * n_r)
    return ChannelRealization(h, mobile, aoa, pl)


def _as_vector(b) -> np.ndarray:
    return b.weights if isinstance(b, BeamWeights) else np.asarray(b, dtype=complex)


def rsrp(H: np.ndarray, tx_beam, rx_combiner, tx_power_dbm: float) -> float:
    """Received power (dBm) through unit-norm beams; nulls report -300 dBm."""
    H = np.asarray(H)
    w, v = _as_vector(tx_beam), _as_vector(rx_combiner)
    if H.ndim != 2 or H.shape != (v.size, w.size):
        raise DimensionMismatchError(
            f"channel {H.shape} incompatible with tx beam {w.size} / rx combiner {v.size}"
        )
    w = w / np.linalg.norm(w)
    v = v / np.linalg.norm(v)
    p = abs(np.vdot(v, H @ w)) ** 2
    if p <= 0.0:
        return RSRP_FLOOR_DBM
    return max(tx_power_dbm + 10 * math.log10(p), RSRP_FLOOR_DBM)


def snr_and_rate(rsrp_dbm: float, budget: LinkBudget) -> Tuple[float, float]:
    snr_db = rsrp_dbm - budget.noise_dbm
    if snr_db == -math.inf:
        return snr_db, 0.0
    return snr_db, budget.bandwidth_hz * math.log2(1.0 + 10 ** (snr_db / 10))


def power_control(
    estimated_range_m: float,
    target_rsrp_dbm: float,
    budget: LinkBudget,
    gain_linear: float,
) -> float:
    """Smallest transmit power (dBm) predicted to reach ``target_rsrp_dbm``,
    clipped to the budget's [min, max] power range."""
    if not estimated_range_m > 0:
        raise DomainError(f"estimated range must be positive, got {estimated_range_m}")
    if not gain_linear > 0:
        raise DomainError("beamforming gain must be positive")
    need = target_rsrp_dbm - 10 * math.log10(gain_linear) + pathloss_inh_los(estimated_range_m, budget.carrier_hz)
    return min(max(need, budget.tx_power_dbm_min), budget.tx_power_dbm_max)


def link_rsrp(tx_power_dbm: float, gain_linear: float, pathloss_db: float) -> float:
    """Closed-form RSRP for a LoS link with a total linear beamforming gain."""
    if gain_linear <= 0:
        return RSRP_FLOOR_DBM
    return max(tx_power_dbm + 10 * math.log10(gain_linear) - pathloss_db, RSRP_FLOOR_DBM)
