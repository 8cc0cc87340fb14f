"""Monte Carlo localization trials with layer-by-layer synthetic noise.

Each trial draws its own generator from ``SeedSequence([seed, trial])``, so
results do not depend on execution order or on how trials are spread over
workers.  The same trial index reuses the same noise stream across sweep
points, which pairs the comparisons.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .crlb import DeploymentGeometry, build_fim
from .errors import AnchorDeployError, DomainError
from .localizer import LocalizerConfig, locate
from .noise import covariance, los_variance_approx
from .optimize import azimuth_layout, geometry_from_alpha
from .raytrace import RayPath, solve_theta0, trace_down
from .ssp import SoundSpeedProfile

CSV_FIELDS = ("variable", "mean", "std", "min", "max", "failures")


@dataclass(frozen=True)
class TrialConfig:
    profile: SoundSpeedProfile
    geometry: DeploymentGeometry
    gamma: float
    trials: int = 50
    seed: int = 0
    localizer: LocalizerConfig | None = None
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.gamma < 0:
            raise DomainError("gamma must be non-negative")

    @property
    def localizer_config(self) -> LocalizerConfig:
        if self.localizer is not None:
            return self.localizer
        return LocalizerConfig(start_depth=float(self.geometry.anchor[2]) + 5.0)


@dataclass(frozen=True)
class TrialStats:
    errors: np.ndarray
    failures: int

    @property
    def mean(self) -> float:
        return float(self.errors.mean()) if self.errors.size else math.nan

    @property
    def std(self) -> float:
        return float(self.errors.std(ddof=1)) if self.errors.size > 1 else math.nan

    @property
    def min(self) -> float:
        return float(self.errors.min()) if self.errors.size else math.nan

    @property
    def max(self) -> float:
        return float(self.errors.max()) if self.errors.size else math.nan

    def row(self, variable) -> dict:
        return {
            "variable": variable,
            "mean": self.mean,
            "std": self.std,
            "min": self.min,
            "max": self.max,
            "failures": self.failures,
        }


def trial_rngs(seed: int, trial: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (noise, geometry) generators for one trial."""
    noise_ss, geo_ss = np.random.SeedSequence([seed, trial]).spawn(2)
    return np.random.default_rng(noise_ss), np.random.default_rng(geo_ss)


def true_paths(profile: SoundSpeedProfile, geometry: DeploymentGeometry) -> list[RayPath]:
    depth = float(geometry.anchor[2])
    return [trace_down(profile, solve_theta0(profile, depth, h), depth) for h in geometry.horizontal]


def synthesize_measurements(
    profile: SoundSpeedProfile,
    geometry: DeploymentGeometry,
    gamma: float,
    rng: np.random.Generator,
    paths: Sequence[RayPath] | None = None,
    with_times: bool = False,
):
    """Noisy path lengths ``sum_i (dl_i + n_i)`` with ``n_i ~ N(0, (gamma dl_i)^2)``.

    With ``with_times`` the matching travel times ``sum_i (dl_i + n_i) / s_{i-1}``
    from the same draws are returned as well.
    """
    if paths is None:
        paths = true_paths(profile, geometry)
    lengths = np.empty(len(paths))
    times = np.empty(len(paths))
    s = profile.speeds
    for j, path in enumerate(paths):
        seg = path.dl + rng.standard_normal(path.dl.size) * (gamma * path.dl)
        lengths[j] = seg.sum()
        times[j] = (seg / s[: seg.size]).sum()
    return (lengths, times) if with_times else lengths


def _one_trial(args):
    profile, geometry, gamma, seed, k, loc_cfg, paths = args
    rng, _ = trial_rngs(seed, k)
    try:
        meas, times = synthesize_measurements(profile, geometry, gamma, rng, paths, with_times=True)
        fix = locate(profile, geometry.refs, meas, loc_cfg, measured_t=times)
    except AnchorDeployError:
        return None
    return float(np.linalg.norm(fix.position - geometry.anchor))


def _collect(results) -> TrialStats:
    errs = np.array([r for r in results if r is not None], dtype=float)
    return TrialStats(errs, sum(r is None for r in results))


def _map(fn, jobs, workers):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def run_trials(config: TrialConfig, trial_indices: Sequence[int] | None = None) -> TrialStats:
    """Repeat synthesize-and-locate ``config.trials`` times."""
    paths = true_paths(config.profile, config.geometry)
    idx = range(config.trials) if trial_indices is None else trial_indices
    jobs = [
        (config.profile, config.geometry, config.gamma, config.seed, k, config.localizer_config, paths)
        for k in idx
    ]
    return _collect(_map(_one_trial, jobs, config.workers))


def _ring(config: TrialConfig, alpha: float, J: int, beta0: float = 0.0) -> DeploymentGeometry:
    return geometry_from_alpha(config.geometry.anchor, alpha, azimuth_layout(J, beta0))


def sweep_alpha(config: TrialConfig, alphas) -> list[tuple[float, TrialStats]]:
    """Uniform-ring trials at each elevation (radians)."""
    J = config.geometry.n_refs
    return [(a, run_trials(replace(config, geometry=_ring(config, a, J)))) for a in alphas]


def sweep_node_count(config: TrialConfig, Js, alpha: float) -> list[tuple[int, TrialStats]]:
    """Uniform-ring trials at fixed elevation for each node count."""
    return [(J, run_trials(replace(config, geometry=_ring(config, alpha, J)))) for J in Js]


def uniform_azimuths(rng: np.random.Generator, J: int) -> np.ndarray:
    return rng.uniform(0.0, 2 * np.pi, size=J)


def _random_trial(args):
    profile, anchor, alpha, J, gamma, seed, k, loc_cfg, sampler = args
    rng, geo_rng = trial_rngs(seed, k)
    try:
        geometry = geometry_from_alpha(anchor, alpha, sampler(geo_rng, J))
        sigma2 = los_variance_approx(profile, max(gamma, 1e-12), alpha, anchor[2])
        build_fim(geometry, covariance(np.full(J, sigma2)))
        meas, times = synthesize_measurements(profile, geometry, gamma, rng, with_times=True)
        fix = locate(profile, geometry.refs, meas, loc_cfg, measured_t=times)
    except AnchorDeployError:
        return None
    return float(np.linalg.norm(fix.position - geometry.anchor))


def random_azimuth_trials(
    config: TrialConfig,
    Js,
    alpha: float,
    sampler: Callable[[np.random.Generator, int], np.ndarray] = uniform_azimuths,
) -> list[tuple[int, TrialStats]]:
    """Trials with azimuths redrawn every trial; degenerate draws count as failures."""
    out = []
    for J in Js:
        jobs = [
            (config.profile, config.geometry.anchor, alpha, J, config.gamma, config.seed, k,
             config.localizer_config, sampler)
            for k in range(config.trials)
        ]
        out.append((J, _collect(_map(_random_trial, jobs, config.workers))))
    return out
