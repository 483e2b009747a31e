"""Exception types shared across the package."""


class PskSdrError(Exception):
    """Base class for all package-specific errors."""


class InvalidInput(PskSdrError):
    """Arguments violate a documented precondition."""


class NotPsd(PskSdrError):
    """A matrix required to be positive semidefinite is not (within tol)."""


class GramMismatch(PskSdrError):
    """Two factors do not share a Gram matrix within tolerance."""


class Unsupported(PskSdrError):
    """The operation is not defined for these parameters (e.g. M < 4)."""


class TooLarge(PskSdrError):
    """Enumeration budget exceeded."""


class NumericalBreakdown(PskSdrError):
    """The solver's cached factorization failed."""
