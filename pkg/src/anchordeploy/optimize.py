"""Optimal common elevation angle and azimuth layouts.

With identical noise at every node the bound is

    T(alpha) = gamma^2 S1(alpha) / J * (4 / cos^2 alpha + 1 / sin^2 alpha),

where ``S1 = sum_i M_i(alpha)``.  Because ``dM_i/dalpha = -M_i^2 sin(2 alpha)``,

    dT/dalpha = (gamma^2 / J) * sin(2 alpha) * P(alpha),
    P(alpha)  = 4 (S1 - cos^2 a S2) / cos^4 a - (S1 + sin^2 a S2) / sin^4 a,

with ``S2 = sum_i M_i^2``.  ``P`` increases strictly from -inf to +inf on the
valid cone, so its single root is the optimum and bisection finds it.  The
``sin(2 alpha) = 0`` stationary point (every node directly overhead) is
rejected: all references collapse onto one point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .crlb import DeploymentGeometry, crlb_bound_hetero, crlb_bound_same_noise
from .errors import DomainError, NoSignChange, NonConvergence, SingularGeometry
from .noise import los_variance_approx, m_terms
from .raytrace import min_grazing_angle
from .ssp import SoundSpeedProfile

ALPHA_TOL = 1e-8  # rad
_EDGE = 1e-6  # rad


@dataclass(frozen=True)
class OptimalDeployment:
    alpha_star: float
    radius: float
    betas: tuple[float, ...]
    trace_at_optimum: float
    p_alpha_residual: float

    @property
    def alpha_star_deg(self) -> float:
        return math.degrees(self.alpha_star)


@dataclass(frozen=True)
class MultiStartReport:
    alpha_star: float
    alphas: np.ndarray  # (starts, J) converged elevation angles
    spread_deg: float
    max_deviation_deg: float
    q_sign_changes: int
    q_monotone: bool


def _depth(profile: SoundSpeedProfile, depth):
    return profile.max_depth if depth is None else float(depth)


def valid_alpha_range(profile: SoundSpeedProfile, depth: float | None = None) -> tuple[float, float]:
    """Open interval of elevations where every ``M_i`` is finite and positive."""
    return min_grazing_angle(profile, _depth(profile, depth)), math.pi / 2


def _sums(profile, alpha, depth):
    M, w = m_terms(profile, alpha, depth)
    return float(np.sum(w * M)), float(np.sum(w * M * M)), float(np.sum(w * M**3))


def p_alpha(profile: SoundSpeedProfile, alpha: float, depth: float | None = None) -> float:
    """Normalized derivative factor ``P(alpha)`` (the ``J gamma^2`` factor dropped)."""
    lo, hi = valid_alpha_range(profile, depth)
    if not (lo < alpha < hi):
        raise DomainError(f"alpha={math.degrees(alpha):.6f} deg outside ({math.degrees(lo):.6f}, 90) deg")
    S1, S2, _ = _sums(profile, alpha, depth)
    c2, s2 = math.cos(alpha) ** 2, math.sin(alpha) ** 2
    return 4 * (S1 - c2 * S2) / (c2 * c2) - (S1 + s2 * S2) / (s2 * s2)


def dp_dalpha(profile: SoundSpeedProfile, alpha: float, depth: float | None = None) -> float:
    """Closed-form ``dP/dalpha``; every term is positive.  Kept as a test oracle."""
    S1, S2, S3 = _sums(profile, alpha, depth)
    c2, s2 = math.cos(alpha) ** 2, math.sin(alpha) ** 2
    sin2a = math.sin(2 * alpha)
    first = 8 * sin2a * (c2 * S1 - c2**2 * S2 + c2**3 * S3) / c2**4
    second = 2 * sin2a * (s2 * S1 + s2**2 * S2 + s2**3 * S3) / s2**4
    return first + second


def trace_bound_at(profile: SoundSpeedProfile, alpha: float, J: int, gamma: float, depth: float | None = None) -> float:
    """Same-noise closed-form bound with the approximate LOS variance at ``alpha``."""
    return crlb_bound_same_noise(J, alpha, los_variance_approx(profile, gamma, alpha, depth))


def trace_bound_derivative(profile, alpha, J, gamma, depth=None) -> float:
    """Analytic ``dT/dalpha = (gamma^2/J) sin(2 alpha) P(alpha)``."""
    return gamma**2 / J * math.sin(2 * alpha) * p_alpha(profile, alpha, depth)


def solve_optimal_alpha(profile: SoundSpeedProfile, depth: float | None = None) -> tuple[float, float]:
    """Unique root of ``P`` on the valid cone by bisection.

    Returns:
        ``(alpha_star, P(alpha_star))``.  Independent of ``gamma`` and ``J``.
    """
    lo, hi = valid_alpha_range(profile, depth)
    a, b = lo + _EDGE, hi - _EDGE
    fa, fb = p_alpha(profile, a, depth), p_alpha(profile, b, depth)
    if not (fa < 0 < fb):
        raise NoSignChange(f"P does not change sign on the valid cone (P(lo)={fa:.3g}, P(hi)={fb:.3g})")
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = p_alpha(profile, mid, depth)
        if fm == 0.0:
            return mid, 0.0
        if fm < 0:
            a = mid
        else:
            b = mid
        if b - a < ALPHA_TOL:
            mid = 0.5 * (a + b)
            return mid, p_alpha(profile, mid, depth)
    raise NonConvergence("bisection on P(alpha) did not converge")


def azimuth_layout(J: int, beta0: float = 0.0) -> np.ndarray:
    """Uniform fan ``beta_j = 2 pi (j-1)/J + beta0``."""
    if J < 3:
        raise DomainError(f"a uniform azimuth fan needs J >= 3, got {J}")
    return 2 * np.pi * np.arange(J) / J + beta0


def subset_layout(subset_sizes, beta0s) -> np.ndarray:
    """Concatenated uniform fans, one per subset, each with its own offset."""
    sizes = list(subset_sizes)
    offsets = list(beta0s)
    if len(sizes) != len(offsets) or not sizes:
        raise DomainError("need one offset per subset")
    if any(n < 3 for n in sizes):
        raise DomainError(f"every subset needs at least 3 nodes, got {sizes}")
    return np.concatenate([azimuth_layout(n, b0) for n, b0 in zip(sizes, offsets)])


def geometry_from_alpha(anchor, alpha: float, betas) -> DeploymentGeometry:
    """Surface nodes on the ring of radius ``depth / tan(alpha)`` around the anchor."""
    anchor = np.asarray(anchor, dtype=float)
    if anchor[2] <= 0:
        raise DomainError("anchor depth must be positive")
    if not (0 < alpha < math.pi / 2):
        raise SingularGeometry(
            "alpha must lie strictly between 0 and 90 deg; at 90 deg every reference "
            "node sits directly above the anchor and the nodes coincide"
        )
    return DeploymentGeometry.from_angles(anchor, np.full(len(betas), alpha), betas)


def optimal_deployment(
    profile: SoundSpeedProfile,
    depth: float,
    J: int,
    gamma: float,
    beta0: float = 0.0,
    subsets=None,
) -> OptimalDeployment:
    alpha, resid = solve_optimal_alpha(profile, depth)
    if subsets:
        betas = subset_layout(subsets, [beta0] * len(subsets))
        if len(betas) != J:
            raise DomainError(f"subset sizes {subsets} do not sum to J={J}")
    else:
        betas = azimuth_layout(J, beta0)
    return OptimalDeployment(
        alpha_star=alpha,
        radius=depth / math.tan(alpha),
        betas=tuple(float(b) for b in betas),
        trace_at_optimum=trace_bound_at(profile, alpha, J, gamma, depth),
        p_alpha_residual=resid,
    )


def _count_sign_changes(values: np.ndarray) -> int:
    signs = np.sign(values[values != 0])
    return int(np.count_nonzero(np.diff(signs)))


def p_alpha_grid(profile, depth=None, step_deg=0.1) -> tuple[np.ndarray, np.ndarray]:
    """``P`` on a degree grid covering the valid cone."""
    lo, hi = valid_alpha_range(profile, depth)
    lo_deg = math.degrees(lo)
    start = math.floor(lo_deg / step_deg + 1) * step_deg
    grid = np.arange(start, 90.0 - 0.5 * step_deg, step_deg)
    grid = grid[(grid > lo_deg) & (grid < 90.0)]
    vals = np.array([p_alpha(profile, math.radians(a), depth) for a in grid])
    return grid, vals


def verify_corollary2(
    profile: SoundSpeedProfile,
    J: int,
    gamma: float,
    depth: float | None = None,
    starts: int = 20,
    seed: int = 0,
) -> MultiStartReport:
    """Minimize the heterogeneous-noise bound over independent per-node elevations.

    Coordinate descent with a bounded scalar minimizer per node, repeated
    from ``starts`` random initial layouts.
    """
    if J < 1:
        raise DomainError("J must be positive")
    depth = _depth(profile, depth)
    alpha_star, _ = solve_optimal_alpha(profile, depth)
    lo, hi = valid_alpha_range(profile, depth)
    lo, hi = lo + _EDGE, hi - _EDGE

    def sigma2(a):
        return los_variance_approx(profile, gamma, a, depth)

    def objective(alphas):
        return crlb_bound_hetero(alphas, [sigma2(a) for a in alphas])

    results = np.empty((starts, J))
    for k in range(starts):
        rng = np.random.default_rng(np.random.SeedSequence([seed, k]))
        alphas = rng.uniform(lo, hi, size=J)
        for _sweep in range(50):
            moved = 0.0
            for j in range(J):

                def f(a, j=j):
                    trial = alphas.copy()
                    trial[j] = a
                    return objective(trial)

                res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
                moved = max(moved, abs(res.x - alphas[j]))
                alphas[j] = res.x
            if moved < 1e-9:
                break
        results[k] = alphas

    _, q = p_alpha_grid(profile, depth)
    return MultiStartReport(
        alpha_star=alpha_star,
        alphas=results,
        spread_deg=math.degrees(float(results.max() - results.min())),
        max_deviation_deg=math.degrees(float(np.abs(results - alpha_star).max())),
        q_sign_changes=_count_sign_changes(q),
        q_monotone=bool(np.all(np.diff(q) > 0)),
    )
