"""Proportional path noise and the equivalent line-of-sight range variance.

Each layer's measured segment carries independent Gaussian noise with
standard deviation ``gamma * dl_i``.  Projecting every segment error onto
the horizontal and then onto the straight reference-to-target line gives a
Gaussian LOS error whose variance is

    sigma_d^2 = cos^2(theta0)/cos^2(alpha) * sum_i gamma^2 s_{i-1}^2 / (s0^2 - s_{i-1}^2 cos^2(theta0))

and, with ``cos(theta0) ~ cos(alpha)``, the approximate form used by the
optimizer, ``gamma^2 * sum_i M_i(alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ApproximationInvalid, DomainError, NonPositiveVariance, TurningRay
from .raytrace import _layer_speeds, _speeds, elevation_angle, ray_totals, trace_down
from .ssp import SoundSpeedProfile


@dataclass(frozen=True)
class NoiseSpec:
    """Proportional noise coefficient (segment sigma = gamma * segment length)."""

    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise DomainError(f"gamma must be positive and finite, got {self.gamma}")


@dataclass(frozen=True, eq=False)
class MeasurementCovariance:
    """Diagonal covariance of the equivalent LOS range errors (m^2)."""

    variances: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.variances)

    @property
    def inverse(self) -> np.ndarray:
        return np.diag(1.0 / self.variances)

    @property
    def inv_sqrt(self) -> np.ndarray:
        return np.diag(1.0 / np.sqrt(self.variances))

    @property
    def is_homogeneous(self) -> bool:
        return bool(np.all(self.variances == self.variances[0]))

    def __len__(self) -> int:
        return self.variances.size


def covariance(variances) -> MeasurementCovariance:
    v = np.atleast_1d(np.asarray(variances, dtype=float)).copy()
    if v.size < 1:
        raise DomainError("need at least one variance")
    if not np.all(np.isfinite(v)) or np.any(v <= 0):
        raise NonPositiveVariance(f"variances must be positive and finite: {v}")
    v.setflags(write=False)
    return MeasurementCovariance(v)


def _depth_or_max(profile: SoundSpeedProfile, depth):
    return profile.max_depth if depth is None else float(depth)


def los_variance(profile: SoundSpeedProfile, gamma: float, theta0: float, target_depth: float) -> float:
    """Exact equivalent LOS variance for a ray launched at ``theta0``."""
    s = _speeds(profile, target_depth)
    layer_s, dz = _layer_speeds(s, float(target_depth))
    s0 = s[0]
    c0 = math.cos(theta0)
    q = s0 * s0 - (layer_s * c0) ** 2
    if np.any(q <= 0):
        raise TurningRay(f"ray with theta0={math.degrees(theta0):.4f} deg turns")
    h, _, _ = ray_totals(profile, theta0, target_depth)
    alpha = elevation_angle(target_depth, h)
    total = float(np.sum(gamma**2 * dz**2 * layer_s**2 / q))
    return c0**2 / math.cos(alpha) ** 2 * total


def los_variance_layers(profile: SoundSpeedProfile, gamma: float, theta0: float, target_depth: float) -> float:
    """Same quantity accumulated from the traced per-layer segments.

    Sums the horizontal projection ``(gamma * dl_i * cos(theta_{i-1}))^2`` of
    every layer, then rescales by ``1/cos^2(alpha)``.
    """
    path = trace_down(profile, theta0, target_depth)
    alpha = elevation_angle(target_depth, path.h)
    horiz = (gamma * path.dl * np.cos(path.grazing)) ** 2
    return float(horiz.sum()) / math.cos(alpha) ** 2


def m_terms(profile: SoundSpeedProfile, alpha: float, target_depth: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Per-layer ``M_i(alpha) = s_{i-1}^2 / (s0^2 - s_{i-1}^2 cos^2 alpha)`` and layer weights.

    Weights are ``dz^2`` (1 except for a fractional last layer).

    Raises:
        ApproximationInvalid: if any denominator is non-positive.
    """
    depth = _depth_or_max(profile, target_depth)
    s = _speeds(profile, depth)
    layer_s, dz = _layer_speeds(s, depth)
    s0 = s[0]
    denom = s0 * s0 - (layer_s * math.cos(alpha)) ** 2
    if np.any(denom <= 0):
        raise ApproximationInvalid(
            f"alpha={math.degrees(alpha):.4f} deg is outside the cone cos(alpha) < s0/max(s)"
        )
    return layer_s**2 / denom, dz**2


def los_variance_approx(profile: SoundSpeedProfile, gamma: float, alpha: float, target_depth: float | None = None) -> float:
    """Approximate LOS variance ``gamma^2 * sum_i M_i(alpha)``."""
    if not (0 < alpha < math.pi / 2):
        raise DomainError("alpha must lie in (0, pi/2)")
    M, w = m_terms(profile, alpha, target_depth)
    return float(gamma**2 * np.sum(w * M))


def simulate_los_errors(
    profile: SoundSpeedProfile,
    gamma: float,
    theta0: float,
    target_depth: float,
    n_draws: int,
    rng: np.random.Generator,
    chunk: int = 4096,
) -> np.ndarray:
    """Draw equivalent LOS errors by direct per-layer simulation.

    Every draw samples one Gaussian per layer with sigma ``gamma * dl_i``,
    projects it to the horizontal with ``cos(theta_{i-1})``, sums, and
    divides by ``cos(alpha)``.
    """
    path = trace_down(profile, theta0, target_depth)
    alpha = elevation_angle(target_depth, path.h)
    weights = gamma * path.dl * np.cos(path.grazing) / math.cos(alpha)
    out = np.empty(n_draws)
    for start in range(0, n_draws, chunk):
        stop = min(start + chunk, n_draws)
        out[start:stop] = rng.standard_normal((stop - start, weights.size)) @ weights
    return out
