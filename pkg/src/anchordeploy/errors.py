"""Exception hierarchy shared by all modules."""


class AnchorDeployError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class ProfileError(AnchorDeployError, ValueError):
    """Malformed or invalid sound speed profile."""


class TurningRay(AnchorDeployError):
    """The ray turns horizontal before reaching the target depth."""


class Unreachable(AnchorDeployError):
    """No non-turning launch angle produces the requested ray quantity."""


class DomainError(AnchorDeployError, ValueError):
    """Argument outside the domain where a formula is defined."""


class ApproximationInvalid(DomainError):
    """The cos(theta0) ~ cos(alpha) approximation has a non-positive denominator."""


class NoSignChange(AnchorDeployError):
    """A bracketing root search found no sign change."""


class SingularGeometry(AnchorDeployError):
    """Fisher information matrix is singular or too ill-conditioned."""


class NonPositiveVariance(AnchorDeployError, ValueError):
    """A variance that must be positive is not."""


class InsufficientNodes(AnchorDeployError):
    """Fewer than three usable reference measurements."""


class NonConvergence(AnchorDeployError):
    """An iterative solver hit its iteration limit."""


class UninvertibleMeasurement(AnchorDeployError):
    """A measured path length or time cannot be matched by any ray at this depth."""


class InvariantViolation(AssertionError):
    """Internal consistency check failed (CLI exit code 2)."""
