"""Backend selection for the ray kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy fallback in ``_pykernels``.  Set ``ANCHORDEPLOY_PURE_PYTHON=1`` to
force the fallback.
"""

import os

from . import _pykernels

KIND_H = _pykernels.KIND_H
KIND_L = _pykernels.KIND_L
KIND_T = _pykernels.KIND_T
STATUS_OK = _pykernels.STATUS_OK
STATUS_TOO_LARGE = _pykernels.STATUS_TOO_LARGE
STATUS_TOO_SMALL = _pykernels.STATUS_TOO_SMALL
STATUS_MAXITER = _pykernels.STATUS_MAXITER

_impl = _pykernels
BACKEND = "python"
if os.environ.get("ANCHORDEPLOY_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

ray_totals = _impl.ray_totals
ray_totals_many = _impl.ray_totals_many
invert_many = _impl.invert_many


def backends():
    """Map of every importable backend name to its module."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels

        found["cython"] = _ckernels
    except ImportError:
        pass
    return found


def set_backend(name: str) -> str:
    """Switch the module-level kernels to backend ``name``; returns the previous name."""
    global ray_totals, ray_totals_many, invert_many, BACKEND
    found = backends()
    if name not in found:
        raise ValueError(f"backend {name!r} not available; have {sorted(found)}")
    prev, mod = BACKEND, found[name]
    ray_totals, ray_totals_many, invert_many = mod.ray_totals, mod.ray_totals_many, mod.invert_many
    BACKEND = name
    return prev
