"""Exception types shared across the package."""


class SpiderNetError(Exception):
    """Base class for errors raised by this package."""


class NonpositiveConductanceError(SpiderNetError, ValueError):
    """A conductance vector has a zero or negative entry where a strictly
    positive one is required."""


class SingularInteriorBlockError(SpiderNetError, ArithmeticError):
    """The interior block of the weighted Laplacian is numerically singular,
    so harmonic extension and the response matrix are undefined."""
