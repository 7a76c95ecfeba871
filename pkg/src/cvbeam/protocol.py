"""Beam-management sessions for codebook-based 5G NR (SSB sweep followed by
CSI-RS refinement) and for vision-aided beam management (SSB sweep followed
by camera localization), each with a latency/energy event ledger."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .array import BeamWeights, Codebook, array_gain, steering_vector_upa
from .errors import DomainError, EmptyCandidateSetError, EmptyInputError, OutOfSectorError
from .geometry import (
    DetectionFailure,
    LocalizationNoiseModel,
    SphericalPoint,
    apply_localization_noise,
    unit_direction,
)

PHASE_ACCESS = "access"
PHASE_REFINEMENT = "refinement"
GAIN_DB_FLOOR = -300.0
# in units of cell widths
BOUNDARY_SNAP = 1e-9


@dataclass(frozen=True)
class SsbGrid:
    """Wide SSB beams tiling azimuth x elevation into equal cells.

    Azimuth is measured in the horizontal (x-z) plane from boresight, elevation
    out of that plane. Cell ``k`` along an axis covers ``(start + k*w, start + (k+1)*w]``
    (the first cell also owns ``start``), so boundary directions go to the lower index.
    The default start centers the grid on boresight.
    """

    n_az: int = 8
    n_el: int = 4
    az_span_deg: float = 360.0
    el_span_deg: float = 180.0
    az_start_deg: Optional[float] = None
    el_start_deg: Optional[float] = None
    burst_ms: float = 5.0
    period_ms: float = 20.0

    def __post_init__(self):
        if self.n_az < 1 or self.n_el < 1:
            raise DomainError("SSB grid needs at least one beam per axis")
        if self.n_az * self.n_el > 64:
            raise DomainError(f"{self.n_az}x{self.n_el} SSB beams exceeds the 64-beam burst limit")
        if not (0 < self.az_span_deg <= 360 and 0 < self.el_span_deg <= 180):
            raise DomainError("SSB spans must be positive (azimuth <= 360, elevation <= 180)")
        if self.burst_ms < 0 or self.period_ms <= 0:
            raise DomainError("SSB timing must be non-negative")

    @property
    def n_beams(self) -> int:
        return self.n_az * self.n_el

    @property
    def az_start(self) -> float:
        return -self.az_span_deg / 2 if self.az_start_deg is None else self.az_start_deg

    @property
    def el_start(self) -> float:
        return -self.el_span_deg / 2 if self.el_start_deg is None else self.el_start_deg

    @property
    def az_width(self) -> float:
        return self.az_span_deg / self.n_az

    @property
    def el_width(self) -> float:
        return self.el_span_deg / self.n_el


@dataclass(frozen=True)
class ProtocolConfig:
    csi_rs_period_ms: float = 10.0
    csi_rs_beams_per_round: int = 4
    refinement_ms: float = 30.0
    cvbm_inference_ms: float = 15.8
    power_5gbm_w: float = 20.0
    power_cvbm_w: float = 10.0

    def __post_init__(self):
        for name in ("csi_rs_period_ms", "refinement_ms", "cvbm_inference_ms", "power_5gbm_w", "power_cvbm_w"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.csi_rs_beams_per_round < 1:
            raise DomainError("csi_rs_beams_per_round must be positive")


@dataclass(frozen=True)
class LedgerEvent:
    label: str
    duration_ms: float
    power_w: float
    phase: str = PHASE_REFINEMENT

    def __post_init__(self):
        if self.duration_ms < 0 or self.power_w < 0:
            raise DomainError("event duration and power must be non-negative")

    @property
    def energy_j(self) -> float:
        return self.duration_ms * self.power_w / 1000.0


@dataclass
class EventLedger:
    events: List[LedgerEvent] = field(default_factory=list)

    def extend(self, events: Iterable[LedgerEvent]):
        self.events.extend(events)

    @property
    def total_latency_ms(self) -> float:
        return sum(e.duration_ms for e in self.events)

    @property
    def total_energy_j(self) -> float:
        return sum(e.energy_j for e in self.events)

    @property
    def refinement_latency_ms(self) -> float:
        return sum(e.duration_ms for e in self.events if e.phase == PHASE_REFINEMENT)

    @property
    def refinement_energy_j(self) -> float:
        return sum(e.energy_j for e in self.events if e.phase == PHASE_REFINEMENT)


class Strategy(str, enum.Enum):
    FIVEG_BM = "5G-BM"
    CVBM = "CVBM"
    CVBM_FALLBACK = "CVBM_fallback"


@dataclass
class BeamSession:
    strategy: Strategy
    chosen_beam: BeamWeights
    ssb_index: int
    ledger: EventLedger
    effective_gain_linear: float
    codeword_index: Optional[int] = None
    estimate: Optional[SphericalPoint] = None

    @property
    def effective_gain_db(self) -> float:
        return gain_to_db(self.effective_gain_linear)


def gain_to_db(g: float) -> float:
    return 10 * math.log10(g) if g > 0 else GAIN_DB_FLOOR


def _axis_cell(angle: float, start: float, width: float, n: int) -> Optional[int]:
    t = (angle - start) / width
    # snap round-off (e.g. sin(pi) != 0) onto the boundary it belongs to
    if abs(t - round(t)) < BOUNDARY_SNAP:
        t = float(round(t))
    if t < 0 or t > n:
        return None
    return max(int(math.ceil(t)) - 1, 0)


def az_el_deg(direction: Sequence[float]) -> Tuple[float, float]:
    x, y, z = direction
    return math.degrees(math.atan2(x, z)), math.degrees(math.atan2(y, math.hypot(x, z)))


def ssb_cell_index(grid: SsbGrid, direction: Sequence[float]) -> Optional[int]:
    """Flat SSB index ``i_el * n_az + i_az`` of a direction, or None outside the grid."""
    az, el = az_el_deg(direction)
    i_az = _axis_cell(az, grid.az_start, grid.az_width, grid.n_az)
    i_el = _axis_cell(el, grid.el_start, grid.el_width, grid.n_el)
    if i_az is None or i_el is None:
        return None
    return i_el * grid.n_az + i_az


def ssb_sweep(
    grid: SsbGrid, truth: SphericalPoint, cfg: ProtocolConfig = ProtocolConfig()
) -> Tuple[int, List[LedgerEvent]]:
    """Index of the SSB beam covering the mobile, i.e. the RSRP argmax when the
    wide beams tile their cells ideally."""
    idx = ssb_cell_index(grid, unit_direction(truth))
    if idx is None:
        raise OutOfSectorError(
            f"mobile at theta={truth.theta_deg:.3f} deg, phi={truth.phi_deg:.3f} deg is outside the SSB grid"
        )
    return idx, [LedgerEvent("ssb_burst", grid.burst_ms, cfg.power_5gbm_w, PHASE_ACCESS)]


@lru_cache(maxsize=16)
def _codeword_cells(cb: Codebook, grid: SsbGrid) -> np.ndarray:
    cells = np.full(len(cb), -1, dtype=int)
    for k in np.flatnonzero(cb.visible):
        idx = ssb_cell_index(grid, cb.directions[k])
        cells[k] = -1 if idx is None else idx
    return cells


def sector_candidates(cb: Codebook, grid: SsbGrid, ssb_index: int) -> np.ndarray:
    """Indices of visible codewords whose lattice direction falls in the SSB cell."""
    if not 0 <= ssb_index < grid.n_beams:
        raise DomainError(f"ssb_index {ssb_index} outside grid of {grid.n_beams} beams")
    return np.flatnonzero(_codeword_cells(cb, grid) == ssb_index)


def csi_rs_refine(
    cb: Codebook,
    ssb_index: int,
    grid: SsbGrid,
    truth: SphericalPoint,
    cfg: ProtocolConfig = ProtocolConfig(),
) -> Tuple[int, BeamWeights, List[LedgerEvent]]:
    """Genie RSRP-argmax over the codewords inside the SSB sector.

    Returns the codebook index, the codeword and a single refinement event of
    ``cfg.refinement_ms`` at the 5G-BM transmit power.
    """
    cand = sector_candidates(cb, grid, ssb_index)
    if cand.size == 0:
        raise EmptyCandidateSetError(f"no codeword points into SSB sector {ssb_index}")
    g = cb.gains(truth.theta, truth.phi)[cand]
    k = int(cand[int(np.argmax(g))])
    events = [LedgerEvent("csi_rs_refinement", cfg.refinement_ms, cfg.power_5gbm_w)]
    return k, cb.codewords[k], events


def run_5gbm_session(
    truth: SphericalPoint, grid: SsbGrid, cb: Codebook, cfg: ProtocolConfig = ProtocolConfig()
) -> BeamSession:
    ledger = EventLedger()
    ssb_index, events = ssb_sweep(grid, truth, cfg)
    ledger.extend(events)
    k, beam, events = csi_rs_refine(cb, ssb_index, grid, truth, cfg)
    ledger.extend(events)
    gain = array_gain(beam, cb.geometry, truth.theta, truth.phi)
    return BeamSession(Strategy.FIVEG_BM, beam, ssb_index, ledger, gain, codeword_index=k)


def run_cvbm_session(
    truth: SphericalPoint,
    grid: SsbGrid,
    noise: LocalizationNoiseModel,
    cb: Codebook,
    cfg: ProtocolConfig = ProtocolConfig(),
    seed: Union[int, np.random.SeedSequence, None] = 0,
) -> BeamSession:
    """SSB sweep, then a beam steered straight at the vision estimate.

    A missed detection falls back to CSI-RS refinement; the fallback session
    then matches the 5G-BM one apart from its strategy label.
    """
    ssb_index, events = ssb_sweep(grid, truth, cfg)
    estimate = apply_localization_noise(truth, noise, seed)
    if isinstance(estimate, DetectionFailure):
        session = run_5gbm_session(truth, grid, cb, cfg)
        session.strategy = Strategy.CVBM_FALLBACK
        return session

    ledger = EventLedger(list(events))
    ledger.extend([LedgerEvent("cvbm_inference", cfg.cvbm_inference_ms, cfg.power_cvbm_w)])
    beam = steering_vector_upa(cb.geometry, estimate.theta, estimate.phi)
    gain = array_gain(beam, cb.geometry, truth.theta, truth.phi)
    return BeamSession(Strategy.CVBM, beam, ssb_index, ledger, gain, estimate=estimate)


@dataclass(frozen=True)
class StrategyStats:
    count: int
    mean_latency_ms: float
    mean_refinement_latency_ms: float
    mean_energy_j: float
    mean_refinement_energy_j: float
    mean_gain_linear: float
    mean_gain_db: float


@dataclass(frozen=True)
class Summary:
    """Aggregates keyed by scheme ("5G-BM", "CVBM"); CVBM includes its fallbacks.

    ``by_label`` breaks the CVBM scheme down into served-by-vision and fallback.
    Ratios are None unless both schemes are present.
    """

    schemes: Dict[str, StrategyStats]
    by_label: Dict[str, StrategyStats]
    fallback_rate: Optional[float]
    overhead_reduction: Optional[float]
    overhead_reduction_with_burst: Optional[float]
    energy_reduction: Optional[float]
    gain_improvement: Optional[float]

    def as_dict(self) -> dict:
        def stats(d):
            return {k: asdict(v) for k, v in d.items()}

        return {
            "schemes": stats(self.schemes),
            "by_label": stats(self.by_label),
            "fallback_rate": self.fallback_rate,
            "overhead_reduction": self.overhead_reduction,
            "overhead_reduction_with_burst": self.overhead_reduction_with_burst,
            "energy_reduction": self.energy_reduction,
            "gain_improvement": self.gain_improvement,
        }


def _stats(sessions: List[BeamSession]) -> StrategyStats:
    return StrategyStats(
        count=len(sessions),
        mean_latency_ms=float(np.mean([s.ledger.total_latency_ms for s in sessions])),
        mean_refinement_latency_ms=float(np.mean([s.ledger.refinement_latency_ms for s in sessions])),
        mean_energy_j=float(np.mean([s.ledger.total_energy_j for s in sessions])),
        mean_refinement_energy_j=float(np.mean([s.ledger.refinement_energy_j for s in sessions])),
        mean_gain_linear=float(np.mean([s.effective_gain_linear for s in sessions])),
        mean_gain_db=float(np.mean([s.effective_gain_db for s in sessions])),
    )


def _reduction(new: float, old: float) -> Optional[float]:
    return None if old == 0 else 1.0 - new / old


def ledger_summary(sessions: Sequence[BeamSession]) -> Summary:
    if not sessions:
        raise EmptyInputError("no sessions to summarize")
    by_label: Dict[str, List[BeamSession]] = {}
    for s in sessions:
        by_label.setdefault(s.strategy.value, []).append(s)
    schemes: Dict[str, List[BeamSession]] = {}
    for s in sessions:
        key = Strategy.FIVEG_BM.value if s.strategy is Strategy.FIVEG_BM else Strategy.CVBM.value
        schemes.setdefault(key, []).append(s)

    scheme_stats = {k: _stats(v) for k, v in schemes.items()}
    label_stats = {k: _stats(v) for k, v in by_label.items()}

    fallback_rate = None
    cv = schemes.get(Strategy.CVBM.value)
    if cv:
        fallback_rate = sum(s.strategy is Strategy.CVBM_FALLBACK for s in cv) / len(cv)

    old, new = scheme_stats.get(Strategy.FIVEG_BM.value), scheme_stats.get(Strategy.CVBM.value)
    if old is None or new is None:
        return Summary(scheme_stats, label_stats, fallback_rate, None, None, None, None)
    return Summary(
        scheme_stats,
        label_stats,
        fallback_rate,
        overhead_reduction=_reduction(new.mean_refinement_latency_ms, old.mean_refinement_latency_ms),
        overhead_reduction_with_burst=_reduction(new.mean_latency_ms, old.mean_latency_ms),
        energy_reduction=_reduction(new.mean_refinement_energy_j, old.mean_refinement_energy_j),
        gain_improvement=(new.mean_gain_linear / old.mean_gain_linear - 1.0) if old.mean_gain_linear > 0 else None,
    )


def session_record(session: BeamSession) -> dict:
    """JSON-ready trace of one session."""
    pointing = session.chosen_beam.pointing
    rec = {
        "strategy": session.strategy.value,
        "ssb_index": session.ssb_index,
        "codeword_index": session.codeword_index,
        "gain_db": session.effective_gain_db,
        "latency_ms": session.ledger.total_latency_ms,
        "energy_j": session.ledger.total_energy_j,
    }
    if session.codeword_index is not None and pointing is not None:
        rec["u_h"], rec["u_v"] = pointing
    if session.estimate is not None:
        rec["theta_deg"] = session.estimate.theta_deg
        rec["phi_deg"] = session.estimate.phi_deg
        rec["range_m"] = session.estimate.r
    return rec


def write_sessions_jsonl(sessions: Iterable[BeamSession], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in sessions:
            fh.write(json.dumps(session_record(s), sort_keys=True) + "\n")
