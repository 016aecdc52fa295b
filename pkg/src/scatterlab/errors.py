"""Exception types shared across the package."""


class ScatterLabError(Exception):
    """Base class for all scatterlab errors."""


class ValidationError(ScatterLabError, ValueError):
    """Input violates a documented precondition."""


class NonHermitianError(ValidationError):
    """Matrix is not Hermitian within tolerance."""


class NotPositiveError(ValidationError):
    """Matrix has an eigenvalue below the allowed tolerance."""


class InvalidStateError(ValidationError):
    """Matrix fails the density-matrix invariants."""


class NonPhysicalMuellerError(ValidationError):
    """Mueller matrix is not completely positive (negative coherency eigenvalue)."""


class ZeroProbabilityError(ScatterLabError):
    """Channel annihilates the state; renormalization impossible."""


class ConfigError(ValidationError):
    """Sweep configuration is malformed or out of range."""
