"""Grid rate-map experiment comparing 5G-BM and CVBM at every user position.

Layout: the BS sits at the origin of the area frame, in the middle of one
edge, boresight along +y. Grid points are the centres of an ``n x n``
partition of the ``width x depth`` area, so ``x`` spans ``(-W/2, W/2)`` and
``y`` spans ``(0, D)``. In the array/camera frame a user at ``(x, y)`` sits at
``(x, elevation_offset_m, y)``.

Seeding: each cell draws from ``SeedSequence(seed, spawn_key=(j, i, stream))``
where ``(j, i)`` are the row/column grid counters and ``stream`` is 0 for 5G-BM
and 1 for CVBM. Results therefore do not depend on evaluation order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .channel import los_channel, power_control, rsrp, snr_and_rate
from .config import ExperimentConfig
from .errors import CvbeamError, EmptyInputError
from .geometry import CartesianPoint, SphericalPoint, cartesian_to_spherical
from .protocol import (
    BeamSession,
    Strategy,
    Summary,
    gain_to_db,
    ledger_summary,
    run_5gbm_session,
    run_cvbm_session,
)

STREAM_5GBM = 0
STREAM_CVBM = 1

HEATMAP_HEADER = (
    "x_m",
    "y_m",
    "rate_5gbm_bps",
    "rate_cvbm_bps",
    "gain_5gbm_db",
    "gain_cvbm_db",
    "strategy_used",
)


@dataclass(frozen=True)
class LinkResult:
    gain_linear: float
    gain_db: float
    tx_power_dbm: float
    rsrp_dbm: float
    snr_db: float
    rate_bps: float


@dataclass(frozen=True)
class RateMapCell:
    x_m: float
    y_m: float
    fivegbm: LinkResult
    cvbm: LinkResult
    strategy_used: Strategy


@dataclass
class GridResult:
    cells: List[RateMapCell]
    summary: Summary
    sessions: List[Tuple[BeamSession, BeamSession]]


class CellError(CvbeamError):
    def __init__(self, x_m, y_m, cause):
        self.x_m, self.y_m = x_m, y_m
        super().__init__(f"cell at (x={x_m:.6g} m, y={y_m:.6g} m): {cause}")


def grid_axes(cfg: ExperimentConfig) -> Tuple[np.ndarray, np.ndarray]:
    n = cfg.grid_resolution
    width, depth = cfg.area
    xs = -width / 2 + (np.arange(n) + 0.5) * width / n
    ys = (np.arange(n) + 0.5) * depth / n
    return xs, ys


def cell_seed(seed: int, j: int, i: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(j, i, stream))


def area_to_spherical(x_m: float, y_m: float, cfg: ExperimentConfig) -> SphericalPoint:
    return cartesian_to_spherical(CartesianPoint(float(x_m), cfg.elevation_offset_m, float(y_m)))


def _link(session: BeamSession, H: np.ndarray, rx: np.ndarray, tx_power_dbm: float, cfg) -> LinkResult:
    p = rsrp(H, session.chosen_beam, rx, tx_power_dbm)
    snr_db, rate = snr_and_rate(p, cfg.link)
    g = session.effective_gain_linear
    return LinkResult(g, gain_to_db(g), tx_power_dbm, p, snr_db, rate)


def _cvbm_tx_power(session: BeamSession, cfg: ExperimentConfig) -> float:
    if cfg.target_rsrp_dbm is None or session.estimate is None:
        return cfg.link.tx_power_dbm_max
    # plan for the ideal aligned gain at the estimated range
    gain = cfg.bs_array.n_elements * cfg.ue_array.n_elements
    return power_control(max(session.estimate.r, 1e-3), cfg.target_rsrp_dbm, cfg.link, gain)


def evaluate_cell(cfg: ExperimentConfig, j: int, i: int, x_m: float, y_m: float):
    truth = area_to_spherical(x_m, y_m, cfg)
    cb = cfg.codebook
    s5 = run_5gbm_session(truth, cfg.ssb, cb, cfg.protocol)
    sc = run_cvbm_session(
        truth, cfg.ssb, cfg.noise, cb, cfg.protocol, seed=cell_seed(cfg.seed, j, i, STREAM_CVBM)
    )
    H = los_channel(cfg.bs_array, cfg.ue_array, truth, cfg.link).matrix
    rx = np.ones(cfg.ue_array.n_elements, dtype=complex)
    cell = RateMapCell(
        float(x_m),
        float(y_m),
        _link(s5, H, rx, cfg.link.tx_power_dbm_max, cfg),
        _link(sc, H, rx, _cvbm_tx_power(sc, cfg), cfg),
        sc.strategy,
    )
    return cell, (s5, sc)


def run_grid_experiment(cfg: ExperimentConfig) -> GridResult:
    xs, ys = grid_axes(cfg)
    cells, sessions = [], []
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            try:
                cell, pair = evaluate_cell(cfg, j, i, x, y)
            except CvbeamError as exc:
                raise CellError(x, y, exc) from exc
            cells.append(cell)
            sessions.append(pair)
    summary = ledger_summary([s for pair in sessions for s in pair])
    return GridResult(cells, summary, sessions)


def fmt6(v: float) -> str:
    return f"{v:.6g}"


def _check_finite(values):
    for v in values:
        if not math.isfinite(v):
            raise CvbeamError(f"non-finite value {v} in output")


def heatmap_csv_text(cells: Sequence[RateMapCell]) -> str:
    if not cells:
        raise EmptyInputError("no cells to emit")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEATMAP_HEADER)
    for c in sorted(cells, key=lambda c: (c.y_m, c.x_m)):
        nums = (c.x_m, c.y_m, c.fivegbm.rate_bps, c.cvbm.rate_bps, c.fivegbm.gain_db, c.cvbm.gain_db)
        _check_finite(nums)
        w.writerow([fmt6(v) for v in nums] + [c.strategy_used.value])
    return buf.getvalue()


def emit_heatmap_csv(cells: Sequence[RateMapCell], path) -> None:
    text = heatmap_csv_text(cells)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_heatmap_csv(path) -> List[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for k in HEATMAP_HEADER[:-1]:
            r[k] = float(r[k])
    return rows


# (key, label, scheme attribute) rows of the per-scheme table
_SCHEME_ROWS = (
    ("mean_gain_db", "mean gain (dB)"),
    ("mean_gain_linear", "mean gain (linear)"),
    ("mean_refinement_latency_ms", "refinement latency (ms)"),
    ("mean_latency_ms", "total latency (ms)"),
    ("mean_refinement_energy_j", "refinement energy (J)"),
    ("mean_energy_j", "total energy (J)"),
    ("power_w", "power (W)"),
    ("mean_rate_bps", "mean rate (bps)"),
    ("sessions", "sessions"),
)

_COMPARISON_ROWS = (
    ("overhead_reduction_pct", "overhead reduction, refinement phase (%)"),
    ("overhead_reduction_with_burst_pct", "overhead reduction incl. SSB burst (%)"),
    ("energy_reduction_pct", "refinement energy reduction (%)"),
    ("gain_improvement_pct", "beamforming gain improvement (%)"),
    ("fallback_rate_pct", "CVBM fallback rate (%)"),
)

REFERENCE_CLAIMS = {
    "overhead_reduction_pct": ">= 40",
    "gain_improvement_pct": ">= 40",
}


def _round6(v: Optional[float]) -> Optional[float]:
    return None if v is None else float(fmt6(v))


def summary_table(
    summary: Summary,
    cfg: Optional[ExperimentConfig] = None,
    cells: Optional[Sequence[RateMapCell]] = None,
) -> dict:
    """Numbers behind both summary formats, rounded to 6 significant digits."""
    schemes: Dict[str, Dict[str, Optional[float]]] = {}
    for name, st in summary.schemes.items():
        row = {
            "mean_gain_db": st.mean_gain_db,
            "mean_gain_linear": st.mean_gain_linear,
            "mean_refinement_latency_ms": st.mean_refinement_latency_ms,
            "mean_latency_ms": st.mean_latency_ms,
            "mean_refinement_energy_j": st.mean_refinement_energy_j,
            "mean_energy_j": st.mean_energy_j,
            "power_w": None,
            "mean_rate_bps": None,
            "sessions": st.count,
        }
        if cfg is not None:
            row["power_w"] = cfg.protocol.power_5gbm_w if name == Strategy.FIVEG_BM.value else cfg.protocol.power_cvbm_w
        if cells:
            attr = "fivegbm" if name == Strategy.FIVEG_BM.value else "cvbm"
            row["mean_rate_bps"] = float(np.mean([getattr(c, attr).rate_bps for c in cells]))
        schemes[name] = {k: _round6(v) for k, v in row.items()}

    def pct(v):
        return None if v is None else 100.0 * v

    comparison = {
        "overhead_reduction_pct": pct(summary.overhead_reduction),
        "overhead_reduction_with_burst_pct": pct(summary.overhead_reduction_with_burst),
        "energy_reduction_pct": pct(summary.energy_reduction),
        "gain_improvement_pct": pct(summary.gain_improvement),
        "fallback_rate_pct": pct(summary.fallback_rate),
    }
    return {
        "schemes": schemes,
        "comparison": {k: _round6(v) for k, v in comparison.items()},
        "reference_claims": dict(REFERENCE_CLAIMS),
    }


def _cell_text(v) -> str:
    return "-" if v is None else fmt6(v)


def emit_summary(summary: Summary, fmt: str = "text", cfg=None, cells=None) -> str:
    table = summary_table(summary, cfg, cells)
    if fmt == "json":
        return json.dumps(table, indent=2, sort_keys=True) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown summary format {fmt!r}")

    names = list(table["schemes"])
    lines = [f"{'metric':<42}" + "".join(f"{n:>16}" for n in names)]
    for key, label in _SCHEME_ROWS:
        lines.append(f"{label:<42}" + "".join(f"{_cell_text(table['schemes'][n][key]):>16}" for n in names))
    lines.append("")
    for key, label in _COMPARISON_ROWS:
        ref = REFERENCE_CLAIMS.get(key)
        suffix = f"   (reference claim {ref})" if ref else ""
        lines.append(f"{label:<42}{_cell_text(table['comparison'][key]):>16}{suffix}")
    return "\n".join(lines) + "\n"
