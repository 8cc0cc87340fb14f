"""Optimal surface reference-node deployment for seafloor anchor positioning.

Plans TOA reference geometries under a depth-dependent sound speed profile
by minimizing the trace of the Cramér-Rao bound, and checks the predictions
with a ray-traced Monte Carlo localizer.
"""

from .errors import AnchorDeployError
from .kernels import BACKEND
from .ssp import SoundSpeedProfile, builtin_profile, iso_profile, load_profile, standardize

__version__ = "0.1.0"

__all__ = [
    "AnchorDeployError",
    "BACKEND",
    "SoundSpeedProfile",
    "builtin_profile",
    "iso_profile",
    "load_profile",
    "standardize",
]
