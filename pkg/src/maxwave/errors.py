"""Exception types raised across the package."""


class MaxwaveError(Exception):
    """Base class for all package errors."""


class GridMismatchError(MaxwaveError, ValueError):
    """Two fields live on different grids, or a value array has the wrong shape."""


class DomainError(MaxwaveError, ValueError):
    """A spatial region does not fit inside the periodic cell or guard band."""


class SupportError(MaxwaveError, ValueError):
    """Frequency support leaves the representable band or the declared region."""


class ResolutionError(MaxwaveError, ValueError):
    """A requested frequency scale is finer than the grid can resolve."""


class DepthError(MaxwaveError, ValueError):
    """A frequency pair is not separated at the finest Whitney scale."""


class DataError(MaxwaveError, ValueError):
    """Input records cannot be fitted (non-positive ratios, too few points)."""


class UndefinedRatioError(MaxwaveError, ArithmeticError):
    """A normalized ratio has a vanishing denominator."""


class ResourceError(MaxwaveError, RuntimeError):
    """A brute-force path was asked to run on a problem that is too large."""


class AccuracyError(MaxwaveError, RuntimeError):
    """A numerical procedure failed to reach its tolerance.

    Parameters
    ----------
    message : str
        Human-readable description.
    iterates : tuple, optional
        The last values produced before giving up, for diagnosis.
    """

    def __init__(self, message, iterates=()):
        super().__init__(message)
        self.iterates = tuple(iterates)
