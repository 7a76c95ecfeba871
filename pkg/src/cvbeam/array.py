"""Planar antenna arrays: steering vectors, DFT codebooks and beam patterns.

Direction cosines follow the camera frame of :mod:`cvbeam.geometry`:
``u_h = sin(theta) cos(phi)`` along the horizontal (x) axis and
``u_v = sin(theta) sin(phi)`` along the vertical (y) axis. Planar steering
vectors are ``kron(a_v, a_h)``, so flat index ``p * n_h + q`` holds the
element in row ``p`` and column ``q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np

from .errors import DomainError, EmptyCodebookError
from .geometry import HALF_PI, SphericalPoint, angle_between, unit_direction

UNIT_MODULUS_TOL = 1e-12


@dataclass(frozen=True)
class ArrayGeometry:
    n_h: int = 8
    n_v: int = 8
    spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if self.n_h < 1 or self.n_v < 1:
            raise DomainError(f"array needs at least one element per axis, got {self.n_h}x{self.n_v}")
        if not self.spacing_wavelengths > 0:
            raise DomainError("element spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.n_h * self.n_v


@dataclass
class BeamWeights:
    """Analog (phase-only) beamformer; normalization happens in gain computations."""

    weights: np.ndarray
    pointing: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=complex)
        if self.weights.ndim != 1:
            raise DomainError("beam weights must be a vector")
        if np.any(np.abs(np.abs(self.weights) - 1.0) > UNIT_MODULUS_TOL):
            raise DomainError("beam weights must have unit modulus")

    def __len__(self):
        return self.weights.size

    def __eq__(self, other):
        if not isinstance(other, BeamWeights):
            return NotImplemented
        return self.pointing == other.pointing and np.array_equal(self.weights, other.weights)


def steering_vector_ula(n: int, spacing: float, u: float) -> np.ndarray:
    if abs(u) > 1.0:
        raise DomainError(f"direction cosine {u} outside [-1, 1]")
    return np.exp(2j * np.pi * spacing * np.arange(n) * u)


def direction_cosines(theta: float, phi: float) -> Tuple[float, float]:
    st = math.sin(theta)
    return st * math.cos(phi), st * math.sin(phi)


def _check_angles(theta: float, phi: float):
    if not 0.0 <= theta < HALF_PI:
        raise DomainError(f"theta={theta} outside [0, pi/2)")
    if not -math.pi < phi <= math.pi:
        raise DomainError(f"phi={phi} outside (-pi, pi]")


def upa_response(geom: ArrayGeometry, u_h: float, u_v: float) -> np.ndarray:
    """Planar steering vector from direction cosines (no visibility check)."""
    a_h = np.exp(2j * np.pi * geom.spacing_wavelengths * np.arange(geom.n_h) * u_h)
    a_v = np.exp(2j * np.pi * geom.spacing_wavelengths * np.arange(geom.n_v) * u_v)
    return np.kron(a_v, a_h)


def steering_vector_upa(geom: ArrayGeometry, theta: float, phi: float) -> BeamWeights:
    _check_angles(theta, phi)
    u_h, u_v = direction_cosines(theta, phi)
    a_h = steering_vector_ula(geom.n_h, geom.spacing_wavelengths, u_h)
    a_v = steering_vector_ula(geom.n_v, geom.spacing_wavelengths, u_v)
    return BeamWeights(np.kron(a_v, a_h), pointing=(theta, phi))


def steering_matrix(geom: ArrayGeometry, u_h: np.ndarray, u_v: np.ndarray) -> np.ndarray:
    """Rows are planar steering vectors for each (u_h, u_v) pair."""
    u_h = np.asarray(u_h, dtype=float).reshape(-1, 1)
    u_v = np.asarray(u_v, dtype=float).reshape(-1, 1)
    k = 2j * np.pi * geom.spacing_wavelengths
    a_h = np.exp(k * u_h * np.arange(geom.n_h))
    a_v = np.exp(k * u_v * np.arange(geom.n_v))
    return (a_v[:, :, None] * a_h[:, None, :]).reshape(len(u_h), geom.n_elements)


def array_gain(w: BeamWeights, geom: ArrayGeometry, theta: float, phi: float) -> float:
    """Linear power gain of beam ``w`` toward (theta, phi); ``N`` when aligned."""
    a = upa_response(geom, *direction_cosines(theta, phi))
    if w.weights.size != a.size:
        raise DomainError(f"beam has {w.weights.size} weights, array has {a.size} elements")
    return float(abs(np.vdot(w.weights, a)) ** 2 / geom.n_elements)


@dataclass(eq=False)
class Codebook:
    """DFT codebook on a uniform direction-cosine lattice.

    Codeword ``k`` sits at lattice point ``(i_v, i_h) = divmod(k, n_h*q_h)``.
    Lattice points outside the visible disc ``u_h**2 + u_v**2 <= 1`` keep their
    index but are never selected.
    """

    geometry: ArrayGeometry
    oversampling: Tuple[int, int]
    u_h: np.ndarray
    u_v: np.ndarray
    matrix: np.ndarray = field(repr=False)

    def __len__(self):
        return self.matrix.shape[0]

    @cached_property
    def codewords(self) -> List[BeamWeights]:
        return [
            BeamWeights(row, pointing=(float(uh), float(uv)))
            for row, uh, uv in zip(self.matrix, self.u_h, self.u_v)
        ]

    @cached_property
    def visible(self) -> np.ndarray:
        return self.u_h ** 2 + self.u_v ** 2 <= 1.0

    @cached_property
    def directions(self) -> np.ndarray:
        """Unit pointing vectors (x, y, z) per codeword; NaN rows when not visible."""
        z = np.sqrt(np.clip(1.0 - self.u_h ** 2 - self.u_v ** 2, 0.0, None))
        d = np.stack([self.u_h, self.u_v, z], axis=1)
        d[~self.visible] = np.nan
        return d

    @property
    def lattice_step(self) -> Tuple[float, float]:
        q_h, q_v = self.oversampling
        return 2.0 / (self.geometry.n_h * q_h), 2.0 / (self.geometry.n_v * q_v)

    def gains(self, theta: float, phi: float) -> np.ndarray:
        """Gain of every codeword toward (theta, phi); invisible ones report -inf."""
        a = upa_response(self.geometry, *direction_cosines(theta, phi))
        g = np.abs(self.matrix.conj() @ a) ** 2 / self.geometry.n_elements
        return np.where(self.visible, g, -np.inf)


def dft_codebook_upa(geom: ArrayGeometry, q_h: int = 2, q_v: int = 2) -> Codebook:
    if q_h < 1 or q_v < 1:
        raise DomainError("oversampling factors must be >= 1")
    m_h, m_v = geom.n_h * q_h, geom.n_v * q_v
    lat_h = -1.0 + 2.0 * np.arange(m_h) / m_h
    lat_v = -1.0 + 2.0 * np.arange(m_v) / m_v
    uv, uh = np.meshgrid(lat_v, lat_h, indexing="ij")
    u_h, u_v = uh.ravel(), uv.ravel()
    return Codebook(geom, (q_h, q_v), u_h, u_v, steering_matrix(geom, u_h, u_v))


def best_codeword_genie(cb: Codebook, geom: ArrayGeometry, theta: float, phi: float) -> Tuple[int, float]:
    if len(cb) == 0 or not cb.visible.any():
        raise EmptyCodebookError("codebook has no selectable codewords")
    if geom != cb.geometry:
        raise DomainError("codebook was built for a different array geometry")
    g = cb.gains(theta, phi)
    k = int(np.argmax(g))
    return k, float(g[k])


def dirichlet_gain_ratio(n: int, spacing: float, du: float) -> float:
    """Relative gain of an n-element ULA at direction-cosine offset ``du``."""
    psi = 2 * math.pi * spacing * du
    den = n * math.sin(psi / 2)
    if abs(den) < 1e-300:
        return 1.0
    return (math.sin(n * psi / 2) / den) ** 2


def worst_case_crossover_gain(cb: Codebook) -> float:
    """Analytic worst relative gain of the lattice: half a step off in both axes."""
    geom = cb.geometry
    step_h, step_v = cb.lattice_step
    return dirichlet_gain_ratio(geom.n_h, geom.spacing_wavelengths, step_h / 2) * dirichlet_gain_ratio(
        geom.n_v, geom.spacing_wavelengths, step_v / 2
    )


def half_power_beamwidth(geom: ArrayGeometry, axis: str = "h", tol_deg: float = 1e-6) -> float:
    """Full width (deg) of the boresight beam's main lobe above N/2, by bisection."""
    if axis not in ("h", "v"):
        raise DomainError(f"axis must be 'h' or 'v', got {axis!r}")
    n = geom.n_h if axis == "h" else geom.n_v
    if n < 2:
        raise DomainError(f"need at least 2 elements along axis {axis}, got {n}")
    phi = 0.0 if axis == "h" else HALF_PI
    beam = BeamWeights(np.ones(geom.n_elements))
    half = geom.n_elements / 2

    def above(theta):
        return array_gain(beam, geom, theta, phi) >= half

    # first null of the cut bounds the main lobe
    lo = 0.0
    hi = math.asin(min(1.0, 1.0 / (n * geom.spacing_wavelengths)))
    hi = min(hi, math.nextafter(HALF_PI, 0.0))
    if above(hi):
        raise DomainError("main lobe never drops to half power inside the visible region")
    tol = math.radians(tol_deg)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if above(mid):
            lo = mid
        else:
            hi = mid
    return 2 * math.degrees(0.5 * (lo + hi))


def worst_case_pointing_error(
    cb: Codebook, max_theta_deg: float = 60.0, n_theta: int = 61, n_phi: int = 181
) -> float:
    """Largest angle (deg) between a target and its genie codeword over a
    (theta, phi) scan of the front cone ``theta <= max_theta_deg``."""
    thetas = np.radians(np.linspace(0.0, max_theta_deg, n_theta))
    phis = np.linspace(-math.pi, math.pi, n_phi, endpoint=False) + 2 * math.pi / n_phi
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    tt, pp = tt.ravel(), pp.ravel()
    targets = steering_matrix(cb.geometry, np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp))
    g = np.abs(targets @ cb.matrix.conj().T) ** 2
    g[:, ~cb.visible] = -np.inf
    best = np.argmax(g, axis=1)
    worst = 0.0
    for t, p, k in zip(tt, pp, best):
        target = unit_direction(SphericalPoint(1.0, float(t), float(p)))
        worst = max(worst, angle_between(target, cb.directions[k]))
    return math.degrees(worst)
