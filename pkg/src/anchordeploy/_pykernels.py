"""Pure numpy implementation of the ray kernels.

Mirrors ``_ckernels.pyx``; used when the compiled extension is not
available or when ``ANCHORDEPLOY_PURE_PYTHON=1``.

Conventions shared by both backends:
  * ``speeds`` is a standardized profile (1 m spacing from the surface).
  * ``depth`` may be fractional; layers 1..floor(depth) are full, and a
    trailing partial layer of thickness ``depth - floor(depth)`` uses
    ``speeds[floor(depth)]``.
  * Layer ``i`` uses the speed at its top, ``speeds[i-1]``.
  * A turning ray (``s0^2 - s^2 cos^2(theta0) <= 0`` on a traversed layer)
    gives NaN totals.
"""

from __future__ import annotations

import math

import numpy as np

KIND_H, KIND_L, KIND_T = 0, 1, 2

STATUS_OK = 0
STATUS_TOO_LARGE = 1  # target above the value at the shallow-angle bracket end
STATUS_TOO_SMALL = 2  # target below the value at the steep-angle bracket end
STATUS_MAXITER = 3


def _layers(speeds: np.ndarray, depth: float) -> tuple[np.ndarray, np.ndarray]:
    n = int(math.floor(depth))
    frac = depth - n
    if frac > 0.0:
        s = speeds[: n + 1]
        w = np.ones(n + 1)
        w[n] = frac
    else:
        s = speeds[:n]
        w = np.ones(n)
    return s, w


def ray_totals_many(speeds, depth, cos0s):
    """Totals (h, L, t) for each surface cosine in ``cos0s``."""
    s, w = _layers(np.asarray(speeds, dtype=float), float(depth))
    c = np.atleast_1d(np.asarray(cos0s, dtype=float))
    s0 = s[0]
    q = s0 * s0 - (s[None, :] * c[:, None]) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        dl = w * s0 / np.sqrt(q)
        h = (dl * (s[None, :] * c[:, None] / s0)).sum(axis=1)
        L = dl.sum(axis=1)
        t = (dl / s).sum(axis=1)
    bad = np.any(q <= 0.0, axis=1)
    h[bad] = np.nan
    L[bad] = np.nan
    t[bad] = np.nan
    return h, L, t


def ray_totals(speeds, depth, cos0):
    h, L, t = ray_totals_many(speeds, depth, [cos0])
    return float(h[0]), float(L[0]), float(t[0])


def value_deriv_many(speeds, depth, kind, thetas):
    """One total and its theta0-derivative per angle; (inf, 0) when turning."""
    s, w = _layers(np.asarray(speeds, dtype=float), float(depth))
    th = np.atleast_1d(np.asarray(thetas, dtype=float))
    c = np.cos(th)[:, None]
    sn = np.sin(th)[:, None]
    s0 = s[0]
    q = s0 * s0 - (s[None, :] * c) ** 2
    bad = np.any(q <= 0.0, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        rq = 1.0 / np.sqrt(q)
        rq3 = rq**3
        if kind == KIND_H:
            v = (w * s * c * rq).sum(axis=1)
            dv = -(w * s * sn * s0 * s0 * rq3).sum(axis=1)
        elif kind == KIND_L:
            v = (w * s0 * rq).sum(axis=1)
            dv = -(w * s0 * s * s * c * sn * rq3).sum(axis=1)
        else:
            v = (w * s0 * rq / s).sum(axis=1)
            dv = -(w * s0 * s * c * sn * rq3).sum(axis=1)
    v[bad] = np.inf
    dv[bad] = 0.0
    return v, dv


def invert_many(speeds, depth, targets, kind, lo, hi, ang_tol, val_tol, max_iter):
    """Root of ``total(theta0) = target`` for each target.

    Newton steps safeguarded by a shrinking bisection bracket; the totals
    decrease strictly in theta0, so ``[lo, hi]`` maps onto ``[f(hi), f(lo)]``.
    """
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    m = targets.size
    out = np.full(m, np.nan)
    status = np.zeros(m, dtype=np.int64)
    f_ends, _ = value_deriv_many(speeds, depth, kind, [lo, hi])
    f_lo, f_hi = f_ends
    status[targets > f_lo + val_tol] = STATUS_TOO_LARGE
    status[targets < f_hi - val_tol] = STATUS_TOO_SMALL
    idx = np.flatnonzero(status == STATUS_OK)
    if idx.size == 0:
        return out, status
    tg = targets[idx]
    a = np.full(idx.size, float(lo))
    b = np.full(idx.size, float(hi))
    x = 0.5 * (a + b)
    dxold = b - a
    dx = dxold.copy()
    f, df = value_deriv_many(speeds, depth, kind, x)
    f = f - tg
    active = np.ones(idx.size, dtype=bool)
    for _ in range(max_iter):
        done = np.abs(f) < val_tol
        pos = f > 0.0
        a = np.where(active & ~done & pos, x, a)
        b = np.where(active & ~done & ~pos, x, b)
        narrow = ~done & (b - a < ang_tol)
        x = np.where(active & narrow, 0.5 * (a + b), x)
        active &= ~(done | narrow)
        if not active.any():
            break
        with np.errstate(invalid="ignore", divide="ignore"):
            newton_bad = (
                (df == 0.0)
                | (((x - b) * df - f) * ((x - a) * df - f) > 0.0)
                | (np.abs(2.0 * f) > np.abs(dxold * df))
            )
            step = np.where(newton_bad, 0.5 * (b - a), f / df)
        x_new = np.where(newton_bad, a + step, x - step)
        dxold = np.where(active, dx, dxold)
        dx = np.where(active, step, dx)
        x = np.where(active, x_new, x)
        small = active & (np.abs(dx) < ang_tol)
        active &= ~small
        if not active.any():
            break
        fa, dfa = value_deriv_many(speeds, depth, kind, x[active])
        f[active] = fa - tg[active]
        df[active] = dfa
    out[idx] = x
    status[idx[active]] = STATUS_MAXITER
    out[idx[active]] = np.nan
    return out, status
