"""Anchor localization by iterative depth fine-tuning.

For a trial depth every measured path length (or travel time) is inverted
through the ray model into an equivalent horizontal range, the ranges are
intersected in 2-D by Gauss-Newton, and the fix is scored by the summed
squared mismatch between modelled and measured travel times.  An outer line
search over depth keeps the best-scoring depth: it walks in the current
direction while the cost improves and reverses with a halved step when it
does not, stopping once the step falls below a threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    AnchorDeployError,
    DomainError,
    InsufficientNodes,
    NonConvergence,
    SingularGeometry,
    UninvertibleMeasurement,
)
from .raytrace import solve_theta0_many
from .ssp import SoundSpeedProfile


@dataclass(frozen=True)
class LocalizerConfig:
    """Depth-search settings.

    ``initial_direction`` is on the z-down axis, so -1 searches toward
    shallower depths first.
    """

    start_depth: float
    initial_step: float = 2.0
    step_threshold: float = 0.2
    initial_direction: int = -1
    max_outer_iterations: int = 200
    horizontal_solver_tolerance: float = 1e-4
    horizontal_max_iterations: int = 100

    def __post_init__(self):
        if self.start_depth <= 0:
            raise DomainError("start_depth must be positive")
        if not (0 < self.step_threshold < self.initial_step):
            raise DomainError("need 0 < step_threshold < initial_step")
        if self.initial_direction not in (-1, 1):
            raise DomainError("initial_direction must be -1 or +1")


@dataclass(frozen=True)
class Fix:
    position: np.ndarray
    cost: float
    iterations: int
    converged: bool
    visited: tuple[tuple[float, float], ...] = field(default=(), repr=False)
    flips: int = 0


def time_cost(simulated_times, measured_times) -> float:
    """Sum of squared travel-time mismatches, paired by index (s^2)."""
    ts = np.asarray(simulated_times, dtype=float)
    tm = np.asarray(measured_times, dtype=float)
    if ts.shape != tm.shape:
        raise DomainError(f"length mismatch: {ts.shape} vs {tm.shape}")
    return float(np.sum((ts - tm) ** 2))


def _refs_xy(refs) -> np.ndarray:
    refs = np.atleast_2d(np.asarray(refs, dtype=float))
    return refs[:, :2]


def _multilaterate(xy, ranges, tol, max_iter) -> np.ndarray:
    p = xy.mean(axis=0)
    for _ in range(max_iter):
        d = p - xy
        r = np.hypot(d[:, 0], d[:, 1])
        r = np.where(r < 1e-9, 1e-9, r)
        J = d / r[:, None]
        resid = r - ranges
        JtJ = J.T @ J
        if np.linalg.cond(JtJ) > 1e12:
            raise SingularGeometry("reference nodes are collinear or coincident in the horizontal")
        step = np.linalg.solve(JtJ, -J.T @ resid)
        p = p + step
        if np.hypot(*step) < tol:
            return p
    raise NonConvergence(f"horizontal multilateration did not converge in {max_iter} iterations")


def horizontal_fix(
    profile: SoundSpeedProfile,
    refs,
    measured,
    depth: float,
    kind: str = "L",
    tolerance: float = 1e-4,
    max_iterations: int = 100,
    measured_t=None,
) -> tuple[np.ndarray, float]:
    """Best horizontal position for an anchor assumed at ``depth``.

    Args:
        measured: Path lengths in meters (``kind="L"``) or one-way travel
            times in seconds (``kind="t"``), one per reference.
        measured_t: Optional measured travel times.  When given, the cost
            compares every node's modelled time against them; otherwise the
            times implied by ``measured`` at this depth are used for the
            usable nodes only.

    Returns:
        ``(xy, cost)`` with the time-matching cost in s^2.  Measurements that
        no ray can reproduce at this depth are dropped from the horizontal fit.

    Raises:
        InsufficientNodes: if fewer than three measurements remain usable.
    """
    xy = _refs_xy(refs)
    measured = np.asarray(measured, dtype=float)
    if measured.size != xy.shape[0]:
        raise DomainError("need one measurement per reference node")
    theta, status = solve_theta0_many(profile, depth, measured, kind)
    usable = status == kernels.STATUS_OK
    if usable.sum() < 3:
        raise InsufficientNodes(f"only {int(usable.sum())} usable measurements at depth {depth:.3f} m")
    s = profile.speeds
    h_hat, _, t_meas = kernels.ray_totals_many(s, float(depth), np.cos(theta[usable]))
    p = _multilaterate(xy[usable], h_hat, tolerance, max_iterations)
    if measured_t is not None:
        t_meas = np.asarray(measured_t, dtype=float)
        r = np.hypot(*(p - xy).T)
    else:
        r = np.hypot(*(p - xy[usable]).T)
    theta_s, status_s = solve_theta0_many(profile, depth, r, "h")
    if np.any(status_s != kernels.STATUS_OK):
        raise UninvertibleMeasurement(f"fitted position not reachable by a direct ray at depth {depth:.3f} m")
    _, _, t_sim = kernels.ray_totals_many(s, float(depth), np.cos(theta_s))
    return p, time_cost(t_sim, t_meas)


def locate(
    profile: SoundSpeedProfile,
    refs,
    measured,
    config: LocalizerConfig,
    kind: str = "L",
    measured_t=None,
) -> Fix:
    """Depth line search around ``config.start_depth`` returning the lowest-cost fix.

    Until some depth yields a fix (e.g. the start is deeper than the
    measured path lengths allow) the search keeps stepping in the initial
    direction without halving.
    """
    last_error: AnchorDeployError | None = None
    visited = []

    def evaluate(z):
        nonlocal last_error
        if not (0 < z <= profile.max_depth):
            return None
        try:
            xy, cost = horizontal_fix(
                profile, refs, measured, z, kind,
                config.horizontal_solver_tolerance, config.horizontal_max_iterations,
                measured_t,
            )
        except AnchorDeployError as exc:
            last_error = exc
            visited.append((z, math.inf))
            return None
        visited.append((z, cost))
        return xy, cost

    best_z = float(config.start_depth)
    best = evaluate(best_z)
    step = float(config.initial_step)
    direction = config.initial_direction
    iterations = flips = 0
    probe_z = best_z
    while step >= config.step_threshold and iterations < config.max_outer_iterations:
        iterations += 1
        if best is None:
            probe_z += direction * step
            result = evaluate(probe_z)
            if result is not None:
                best, best_z = result, probe_z
            continue
        z = best_z + direction * step
        result = evaluate(z)
        if result is not None and result[1] < best[1]:
            best, best_z = result, z
        else:
            direction = -direction
            step *= 0.5
            flips += 1
    if best is None:
        raise last_error if last_error is not None else InsufficientNodes("no depth produced a fix")
    xy, cost = best
    return Fix(
        position=np.array([xy[0], xy[1], best_z]),
        cost=cost,
        iterations=iterations,
        converged=step < config.step_threshold,
        visited=tuple(visited),
        flips=flips,
    )


def lengths_from_times(profile: SoundSpeedProfile, times, depth: float) -> np.ndarray:
    """Convert travel times to path lengths at a given depth through the ray model."""
    theta, status = solve_theta0_many(profile, depth, times, "t")
    if np.any(status != kernels.STATUS_OK):
        raise UninvertibleMeasurement("travel time not reproducible by a direct ray at this depth")
    _, L, _ = kernels.ray_totals_many(profile.speeds, float(depth), np.cos(theta))
    return L
