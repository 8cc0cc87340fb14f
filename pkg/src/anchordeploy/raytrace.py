"""Stratified ray tracing with a constant speed in each 1 m layer.

A ray leaves a surface node with grazing angle ``theta0`` and bends by
Snell's law, ``cos(theta_i) / s_i = cos(theta0) / s0``.  Layer ``i``
(depth ``i-1`` to ``i``) is crossed at the grazing angle of its top,
``theta_{i-1}``, with horizontal advance ``dz / tan(theta_{i-1})`` and
segment length ``dz / sin(theta_{i-1})``.  Travel time charges each segment
at the top-of-layer speed ``s_{i-1}``.

Target depths may be fractional: the last, partial layer has thickness
``depth - floor(depth)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NonConvergence, ProfileError, TurningRay, Unreachable
from .ssp import SoundSpeedProfile

ANGLE_TOL = 1e-10  # rad
H_TOL = 1e-6  # m
T_TOL = 1e-12  # s
MAX_BISECT = 200
_EDGE = 1e-6  # rad kept clear of the turning limit


@dataclass(frozen=True, eq=False)
class RayPath:
    """One traced ray from the surface down to ``depth``.

    ``grazing[i]``, ``dh[i]``, ``dl[i]`` describe layer ``i+1``.
    """

    theta0: float
    depth: float
    grazing: np.ndarray
    dz: np.ndarray
    dh: np.ndarray
    dl: np.ndarray
    h: float
    L: float
    t: float


def _speeds(profile: SoundSpeedProfile, depth: float) -> np.ndarray:
    if not profile.is_standardized:
        raise ProfileError("ray tracing requires a standardized profile")
    if not (depth > 0):
        raise ProfileError(f"target depth must be positive, got {depth}")
    if depth > profile.max_depth:
        raise ProfileError(f"target depth {depth} m exceeds profile depth {profile.max_depth} m")
    return profile.speeds


def _layer_speeds(s: np.ndarray, depth: float) -> tuple[np.ndarray, np.ndarray]:
    n = int(math.floor(depth))
    frac = depth - n
    if frac > 0:
        return s[: n + 1], np.concatenate([np.ones(n), [frac]])
    return s[:n], np.ones(n)


def min_grazing_angle(profile: SoundSpeedProfile, depth: float) -> float:
    """Smallest surface grazing angle whose ray reaches ``depth`` without turning.

    Zero when no traversed layer is faster than the surface.
    """
    s = _speeds(profile, depth)
    layer_s, _ = _layer_speeds(s, depth)
    ratio = s[0] / layer_s.max()
    return 0.0 if ratio >= 1.0 else math.acos(ratio)


def _check_theta0(theta0: float) -> None:
    if not (0.0 < theta0 <= math.pi / 2):
        raise ProfileError(f"theta0 must lie in (0, pi/2], got {theta0}")


def ray_totals(profile: SoundSpeedProfile, theta0: float, depth: float) -> tuple[float, float, float]:
    """Horizontal distance, path length and travel time of one ray.

    Raises:
        TurningRay: if the ray turns before ``depth``.
    """
    s = _speeds(profile, depth)
    _check_theta0(theta0)
    h, L, t = kernels.ray_totals(s, float(depth), math.cos(theta0))
    if math.isnan(h):
        raise TurningRay(
            f"ray with theta0={math.degrees(theta0):.4f} deg turns above {depth} m"
        )
    return h, L, t


def trace_down(profile: SoundSpeedProfile, theta0: float, target_depth: float) -> RayPath:
    """Layer-by-layer trace keeping every per-layer quantity."""
    s = _speeds(profile, target_depth)
    _check_theta0(theta0)
    layer_s, dz = _layer_speeds(s, float(target_depth))
    s0 = s[0]
    c0 = math.cos(theta0)
    cos_i = layer_s * c0 / s0
    q = s0 * s0 - (layer_s * c0) ** 2
    if np.any(q <= 0):
        bad = int(np.argmax(q <= 0))
        raise TurningRay(
            f"ray with theta0={math.degrees(theta0):.4f} deg turns in layer {bad + 1}"
        )
    grazing = np.arctan2(np.sqrt(q) / s0, cos_i)
    dh = dz / np.tan(grazing)
    dl = dz / np.sin(grazing)
    return RayPath(
        theta0=float(theta0),
        depth=float(target_depth),
        grazing=grazing,
        dz=dz,
        dh=dh,
        dl=dl,
        h=float(dh.sum()),
        L=float(dl.sum()),
        t=float((dl / layer_s).sum()),
    )


def _solve(profile, depth, targets, kind, tol, what):
    s = _speeds(profile, depth)
    lo = min_grazing_angle(profile, depth) + _EDGE
    hi = math.pi / 2
    theta, status = kernels.invert_many(
        s, float(depth), np.atleast_1d(np.asarray(targets, dtype=float)), kind,
        lo, hi, ANGLE_TOL, tol, MAX_BISECT,
    )
    return theta, status


def _raise_for(status: int, what: str, target: float, depth: float) -> None:
    if status == kernels.STATUS_TOO_LARGE:
        raise Unreachable(f"{what} {target:.6g} exceeds the turning-limit value at depth {depth} m")
    if status == kernels.STATUS_TOO_SMALL:
        raise Unreachable(f"{what} {target:.6g} is below the vertical-ray value at depth {depth} m")
    if status == kernels.STATUS_MAXITER:
        raise NonConvergence(f"bisection for {what} did not converge in {MAX_BISECT} iterations")


def solve_theta0(profile: SoundSpeedProfile, target_depth: float, h_target: float) -> float:
    """Launch angle whose ray reaches ``target_depth`` at horizontal offset ``h_target``.

    Horizontal distance decreases strictly with the launch angle, so the
    bracket between the turning limit and the vertical has a unique root.
    """
    if h_target < 0:
        raise ProfileError("h_target must be non-negative")
    theta, status = _solve(profile, target_depth, [h_target], kernels.KIND_H, H_TOL, "h")
    _raise_for(int(status[0]), "horizontal distance", h_target, target_depth)
    return float(theta[0])


def solve_theta0_many(profile, target_depth, targets, kind="h"):
    """Vectorized launch-angle inversion.

    ``kind`` is ``"h"`` (horizontal distance), ``"L"`` (path length) or
    ``"t"`` (travel time).  Returns ``(theta0, status)`` arrays; entries that
    cannot be inverted are NaN with a non-zero status code from
    :mod:`anchordeploy.kernels`.
    """
    code, tol = {"h": (kernels.KIND_H, H_TOL), "L": (kernels.KIND_L, H_TOL), "t": (kernels.KIND_T, T_TOL)}[kind]
    return _solve(profile, target_depth, targets, code, tol, kind)


def solve_theta0_for_length(profile: SoundSpeedProfile, target_depth: float, L_target: float) -> float:
    theta, status = solve_theta0_many(profile, target_depth, [L_target], "L")
    _raise_for(int(status[0]), "path length", L_target, target_depth)
    return float(theta[0])


def solve_theta0_for_time(profile: SoundSpeedProfile, target_depth: float, t_target: float) -> float:
    theta, status = solve_theta0_many(profile, target_depth, [t_target], "t")
    _raise_for(int(status[0]), "travel time", t_target, target_depth)
    return float(theta[0])


def elevation_angle(target_depth: float, h: float) -> float:
    """Elevation of the straight reference-to-target line above the horizontal."""
    if target_depth <= 0 or h < 0:
        raise ProfileError("need target_depth > 0 and h >= 0")
    return math.atan2(target_depth, h)


def grazing_elevation_ratio(profile: SoundSpeedProfile, target_depth: float, theta0: float) -> float:
    """``cos^2(theta0) / cos^2(alpha)`` for the ray launched at ``theta0``."""
    h, _, _ = ray_totals(profile, theta0, target_depth)
    alpha = elevation_angle(target_depth, h)
    return math.cos(theta0) ** 2 / math.cos(alpha) ** 2
