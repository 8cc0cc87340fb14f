"""Sound speed profiles: loading, validation and 1 m standardization.

Depth is positive downward with the sea surface at 0.  Every ray and noise
computation in the package runs on a *standardized* profile, i.e. speeds
sampled at integer depths 0, 1, 2, ... so that layer ``i`` spans
``[i-1, i]`` with thickness exactly 1 m.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .errors import ProfileError

BUILTIN_PROFILES = ("ssp1", "ssp2", "experiment")


@dataclass(frozen=True, eq=False)
class SoundSpeedProfile:
    """Depth/speed table.

    Attributes:
        depths: Depths in meters, strictly increasing.
        speeds: Sound speeds in m/s, one per depth.
        name: Optional label used in reports.
    """

    depths: np.ndarray
    speeds: np.ndarray
    name: str = ""

    def __post_init__(self):
        depths = np.ascontiguousarray(self.depths, dtype=float)
        speeds = np.ascontiguousarray(self.speeds, dtype=float)
        if depths.ndim != 1 or speeds.ndim != 1 or depths.shape != speeds.shape:
            raise ProfileError("depths and speeds must be 1-D arrays of equal length")
        if depths.size < 2:
            raise ProfileError("a profile needs at least 2 samples")
        if not (np.all(np.isfinite(depths)) and np.all(np.isfinite(speeds))):
            raise ProfileError("profile contains non-finite values")
        if np.any(speeds <= 0):
            raise ProfileError("sound speeds must be strictly positive")
        if np.any(np.diff(depths) <= 0):
            raise ProfileError("depths must be strictly increasing")
        depths.setflags(write=False)
        speeds.setflags(write=False)
        object.__setattr__(self, "depths", depths)
        object.__setattr__(self, "speeds", speeds)

    @property
    def max_depth(self) -> float:
        return float(self.depths[-1])

    @property
    def surface_speed(self) -> float:
        return float(self.speeds[0])

    @property
    def is_standardized(self) -> bool:
        return self.depths[0] == 0.0 and bool(np.all(np.diff(self.depths) == 1.0))

    def __len__(self) -> int:
        return self.depths.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, SoundSpeedProfile):
            return NotImplemented
        return np.array_equal(self.depths, other.depths) and np.array_equal(
            self.speeds, other.speeds
        )

    def speed_at(self, depth: float) -> float:
        """Linearly interpolated speed at ``depth``."""
        if depth < self.depths[0] or depth > self.depths[-1]:
            raise ProfileError(f"depth {depth} m outside profile range")
        return float(np.interp(depth, self.depths, self.speeds))


def _parse_rows(lines: Iterable[str]) -> list[tuple[float, float]]:
    rows = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ProfileError(f"line {lineno}: expected 'depth speed', got {raw.strip()!r}")
        try:
            depth, speed = float(parts[0]), float(parts[1])
        except ValueError:
            raise ProfileError(f"line {lineno}: non-numeric value in {raw.strip()!r}") from None
        if not (math.isfinite(depth) and math.isfinite(speed)):
            raise ProfileError(f"line {lineno}: non-finite value")
        if speed <= 0:
            raise ProfileError(f"line {lineno}: non-positive speed {speed}")
        rows.append((depth, speed))
    return rows


def load_profile(source: TextIO | str, name: str = "") -> SoundSpeedProfile:
    """Parse a two-column ``depth_m speed_mps`` text profile.

    Rows may appear in any order and ``#`` starts a comment.  Duplicate
    depths are rejected rather than averaged.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    rows = _parse_rows(source)
    if len(rows) < 2:
        raise ProfileError(f"need at least 2 rows, found {len(rows)}")
    rows.sort(key=lambda r: r[0])
    depths = np.array([r[0] for r in rows])
    dup = np.flatnonzero(np.diff(depths) == 0)
    if dup.size:
        raise ProfileError(f"duplicate depth {depths[dup[0]]} m")
    return SoundSpeedProfile(depths, np.array([r[1] for r in rows]), name=name)


def load_profile_file(path: str | Path) -> SoundSpeedProfile:
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as fh:
            return load_profile(fh, name=path.stem)
    except FileNotFoundError:
        raise ProfileError(f"SSP file not found: {path}") from None


def builtin_profile(name: str) -> SoundSpeedProfile:
    """Return one of the shipped reconstructed profiles (raw, not standardized)."""
    if name not in BUILTIN_PROFILES:
        raise ProfileError(f"unknown builtin profile {name!r}; choose from {BUILTIN_PROFILES}")
    text = resources.files("anchordeploy").joinpath("data", f"{name}.txt").read_text("utf-8")
    return load_profile(text, name=name)


def iso_profile(speed: float = 1500.0, max_depth: float = 6000.0) -> SoundSpeedProfile:
    """Constant-speed ocean (already standardized when ``max_depth`` is an integer)."""
    n = int(math.floor(max_depth))
    depths = np.arange(n + 1, dtype=float)
    return SoundSpeedProfile(depths, np.full(n + 1, float(speed)), name=f"iso{speed:g}")


def standardize(profile: SoundSpeedProfile) -> SoundSpeedProfile:
    """Resample onto the integer depth grid ``0, 1, ..., floor(max_depth)``.

    Linear interpolation between raw samples.  A profile whose first sample
    is below the surface is extended with a constant speed up to 0 m (with a
    warning); nothing is extrapolated below the last sample.
    """
    depths, speeds = profile.depths, profile.speeds
    if depths[-1] < 1.0:
        raise ProfileError("profile must reach at least 1 m depth")
    if depths[0] < 0:
        raise ProfileError("profile depths must be non-negative")
    if depths[0] > 0:
        warnings.warn(
            f"profile starts at {depths[0]} m; extending speed {speeds[0]} m/s flat to the surface",
            stacklevel=2,
        )
        depths = np.concatenate([[0.0], depths])
        speeds = np.concatenate([[speeds[0]], speeds])
    grid = np.arange(int(math.floor(depths[-1])) + 1, dtype=float)
    return SoundSpeedProfile(grid, np.interp(grid, depths, speeds), name=profile.name)


def gradients(profile: SoundSpeedProfile) -> np.ndarray:
    """Per-layer relative speed change ``g_i = s_i / s_{i-1} - 1`` for i = 1..I."""
    if not profile.is_standardized:
        raise ProfileError("gradients require a standardized profile")
    s = profile.speeds
    return s[1:] / s[:-1] - 1.0


def speeds_from_gradients(s0: float, g: np.ndarray) -> np.ndarray:
    """Inverse of :func:`gradients`: rebuild ``s_0..s_I`` from the surface speed."""
    return s0 * np.concatenate([[1.0], np.cumprod(1.0 + np.asarray(g, dtype=float))])


def as_standardized(profile: SoundSpeedProfile) -> SoundSpeedProfile:
    return profile if profile.is_standardized else standardize(profile)
