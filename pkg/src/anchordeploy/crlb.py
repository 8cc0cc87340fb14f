"""Fisher information, CRLB traces and the closed-form bounds on them.

The geometry convention: z is positive downward, reference nodes sit on the
surface (z = 0) and the anchor is at depth ``z > 0``.  For each reference
node, ``alpha`` is the elevation of the straight line to the anchor and
``beta`` the horizontal bearing of the node as seen from the anchor.  The
Jacobian row ``[cos a cos b, cos a sin b, sin a]`` differs from the exact
range gradient only by a sign flip of both horizontal components, which is
an orthogonal similarity of the FIM and leaves every trace and residual
magnitude unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NonPositiveVariance, SingularGeometry
from .noise import MeasurementCovariance

COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class DeploymentGeometry:
    """Anchor position plus J surface reference nodes (meters, z down)."""

    anchor: np.ndarray
    refs: np.ndarray
    alpha: np.ndarray = field(init=False)
    beta: np.ndarray = field(init=False)
    ranges: np.ndarray = field(init=False)

    def __post_init__(self):
        anchor = np.asarray(self.anchor, dtype=float).reshape(3)
        refs = np.atleast_2d(np.asarray(self.refs, dtype=float))
        if refs.shape[1] != 3:
            raise DomainError("refs must be an (J, 3) array")
        if anchor[2] <= 0:
            raise DomainError("anchor must lie below the surface")
        if np.any(refs[:, 2] != 0.0):
            raise DomainError("reference nodes must be on the surface (z = 0)")
        rel = refs - anchor
        horiz = np.hypot(rel[:, 0], rel[:, 1])
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "refs", refs)
        object.__setattr__(self, "alpha", np.arctan2(anchor[2], horiz))
        object.__setattr__(self, "beta", np.mod(np.arctan2(rel[:, 1], rel[:, 0]), 2 * np.pi))
        object.__setattr__(self, "ranges", np.linalg.norm(rel, axis=1))

    @property
    def n_refs(self) -> int:
        return self.refs.shape[0]

    @property
    def horizontal(self) -> np.ndarray:
        return self.anchor[2] / np.tan(self.alpha)

    @classmethod
    def from_angles(cls, anchor, alphas, betas) -> "DeploymentGeometry":
        anchor = np.asarray(anchor, dtype=float)
        alphas = np.broadcast_to(np.asarray(alphas, dtype=float), np.shape(betas))
        betas = np.asarray(betas, dtype=float)
        r = anchor[2] / np.tan(alphas)
        refs = np.column_stack(
            [anchor[0] + r * np.cos(betas), anchor[1] + r * np.sin(betas), np.zeros_like(r)]
        )
        return cls(anchor, refs)


@dataclass(frozen=True, eq=False)
class Fim:
    """3x3 Fisher information matrix with its column-vector decomposition."""

    matrix: np.ndarray
    a_hat: np.ndarray
    b_hat: np.ndarray
    c_hat: np.ndarray

    @property
    def norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(self.a_hat), np.linalg.norm(self.b_hat), np.linalg.norm(self.c_hat)])

    @property
    def cos_phi(self) -> np.ndarray:
        """Cosines of the angles (a,b), (a,c), (b,c) between the whitened columns."""
        na, nb, nc = self.norms
        return np.array(
            [
                self.a_hat @ self.b_hat / (na * nb),
                self.a_hat @ self.c_hat / (na * nc),
                self.b_hat @ self.c_hat / (nb * nc),
            ]
        )


@dataclass(frozen=True)
class CrlbReport:
    trace_exact: float
    trace_bound: float
    equality_residuals: tuple[float, float, float, float]
    bound_gap: float


def jacobian_row(alpha: float, beta: float) -> np.ndarray:
    ca = math.cos(alpha)
    return np.array([ca * math.cos(beta), ca * math.sin(beta), math.sin(alpha)])


def jacobian(alphas, betas) -> np.ndarray:
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    ca = np.cos(alphas)
    return np.column_stack([ca * np.cos(betas), ca * np.sin(betas), np.sin(alphas)])


def build_fim_from_angles(alphas, betas, variances) -> Fim:
    J0 = jacobian(alphas, betas)
    w = 1.0 / np.sqrt(np.asarray(variances, dtype=float))
    if J0.shape[0] != w.size:
        raise DomainError("need one variance per reference node")
    whitened = J0 * w[:, None]
    a_hat, b_hat, c_hat = whitened.T
    matrix = whitened.T @ whitened
    matrix = 0.5 * (matrix + matrix.T)
    fim = Fim(matrix, a_hat.copy(), b_hat.copy(), c_hat.copy())
    _check_conditioning(fim.matrix)
    return fim


def build_fim(geometry: DeploymentGeometry, cov: MeasurementCovariance) -> Fim:
    """FIM ``J0^T Sigma^-1 J0`` assembled from the whitened columns."""
    if len(cov) != geometry.n_refs:
        raise DomainError(f"{geometry.n_refs} references but {len(cov)} variances")
    return build_fim_from_angles(geometry.alpha, geometry.beta, cov.variances)


def _check_conditioning(matrix: np.ndarray) -> None:
    eig = np.linalg.eigvalsh(matrix)
    if eig[0] <= 0 or eig[-1] / eig[0] > COND_LIMIT:
        raise SingularGeometry(f"FIM is singular or ill-conditioned (eigenvalues {eig})")


def _adjugate_trace(m: np.ndarray) -> tuple[float, float]:
    """Trace of the adjugate and the determinant of a symmetric 3x3 matrix."""
    (a, b, c), (_, d, e), (_, _, f) = m
    adj_trace = (d * f - e * e) + (a * f - c * c) + (a * d - b * b)
    det = a * (d * f - e * e) - b * (b * f - c * e) + c * (b * e - c * d)
    return adj_trace, det


def crlb_trace_exact(fim: Fim) -> float:
    """``tr(Phi^-1)`` via the explicit 3x3 adjugate."""
    adj_trace, det = _adjugate_trace(fim.matrix)
    if det <= 0:
        raise SingularGeometry("FIM determinant is not positive")
    return adj_trace / det


def crlb_trace_angles(fim: Fim) -> float:
    """``tr(Phi^-1)`` from column norms and the pairwise angle cosines."""
    na2, nb2, nc2 = fim.norms**2
    c1, c2, c3 = fim.cos_phi
    lam = 1 - c1 * c1 - c2 * c2 - c3 * c3 + 2 * c1 * c2 * c3
    if lam <= 0:
        raise SingularGeometry("degenerate column angles")
    return (1 - c3 * c3) / (na2 * lam) + (1 - c2 * c2) / (nb2 * lam) + (1 - c1 * c1) / (nc2 * lam)


def crlb_lower_bound(fim: Fim) -> float:
    """``1/|a|^2 + 1/|b|^2 + 1/|c|^2``, reached iff the whitened columns are orthogonal."""
    return float(np.sum(1.0 / fim.norms**2))


def crlb_bound_same_noise(J: int, alpha: float, sigma2_d: float) -> float:
    """``4 sigma^2/(J cos^2 a) + sigma^2/(J sin^2 a)``; +inf at the endpoints."""
    if J < 3:
        raise DomainError("need J >= 3")
    if sigma2_d <= 0:
        raise NonPositiveVariance("sigma2_d must be positive")
    c2 = math.cos(alpha) ** 2
    s2 = math.sin(alpha) ** 2
    if c2 <= 0 or s2 <= 0 or not (0 < alpha < math.pi / 2):
        return math.inf
    return 4 * sigma2_d / (J * c2) + sigma2_d / (J * s2)


def crlb_bound_hetero(alphas, sigma2s) -> float:
    """Heterogeneous-noise bound as a plain per-node sum (no 1/J factor).

    For J identical nodes this equals ``J**2`` times :func:`crlb_bound_same_noise`.
    """
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    sigma2s = np.atleast_1d(np.asarray(sigma2s, dtype=float))
    if alphas.shape != sigma2s.shape or alphas.size == 0:
        raise DomainError("alphas and sigma2s must be non-empty and equal length")
    if np.any(sigma2s <= 0):
        raise NonPositiveVariance("variances must be positive")
    return float(np.sum(4 * sigma2s / np.cos(alphas) ** 2) + np.sum(sigma2s / np.sin(alphas) ** 2))


def crlb_bounds_with_ref_error(J: int, alpha: float, sigma2_d: float, sigma2_r: float) -> tuple[float, float]:
    """Bounds when reference positions err by variance ``sigma2_r``.

    The error projects onto the slant range by ``cos(alpha)`` and can add to
    or cancel the ranging error, giving ``sigma2_d -/+ sigma2_r cos^2(alpha)``.
    """
    if sigma2_r < 0:
        raise NonPositiveVariance("sigma2_r must be non-negative")
    shift = sigma2_r * math.cos(alpha) ** 2
    if sigma2_d - shift <= 0:
        raise NonPositiveVariance(
            f"sigma2_d - sigma2_r cos^2(alpha) = {sigma2_d - shift:.3g} is not positive"
        )
    return (
        crlb_bound_same_noise(J, alpha, sigma2_d - shift),
        crlb_bound_same_noise(J, alpha, sigma2_d + shift),
    )


def equality_residuals_from_angles(alphas, betas, variances=None) -> np.ndarray:
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    w = np.ones_like(alphas) if variances is None else 1.0 / np.asarray(variances, dtype=float)
    ca, sa = np.cos(alphas), np.sin(alphas)
    cb, sb = np.cos(betas), np.sin(betas)
    return np.array(
        [
            np.sum(w * ca * ca * cb * sb),
            np.sum(w * ca * cb * sa),
            np.sum(w * ca * sb * sa),
            np.sum(w * ca * ca * np.cos(2 * betas)),
        ]
    )


def equality_residuals(geometry: DeploymentGeometry, cov: MeasurementCovariance | None = None) -> np.ndarray:
    """The four weighted sums that vanish when the closed-form bound is attained."""
    v = None if cov is None else cov.variances
    return equality_residuals_from_angles(geometry.alpha, geometry.beta, v)


def crlb_report(geometry: DeploymentGeometry, cov: MeasurementCovariance) -> CrlbReport:
    fim = build_fim(geometry, cov)
    exact = crlb_trace_exact(fim)
    bound = crlb_lower_bound(fim)
    res = equality_residuals(geometry, cov)
    return CrlbReport(exact, bound, tuple(float(r) for r in res), exact - bound)
