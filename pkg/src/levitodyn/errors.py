"""Exception types raised across the package."""


class LevitodynError(Exception):
    """Base class for all package errors."""


class GimbalLock(LevitodynError):
    """Euler-angle map is singular (|sin beta| below threshold)."""


class DegeneratePolarization(LevitodynError, ValueError):
    pass


class NotUnitVector(LevitodynError, ValueError):
    pass


class UnphysicalDielectric(LevitodynError, ValueError):
    pass


class DimensionMismatch(LevitodynError, ValueError):
    pass


class InvalidUnraveling(LevitodynError, ValueError):
    pass


class NumericalBlowup(LevitodynError, FloatingPointError):
    """A non-finite value appeared in an integrated state."""


class SegmentTooLong(LevitodynError, ValueError):
    pass


class FitDiverged(LevitodynError, RuntimeError):
    pass


class ConfigInvalid(LevitodynError, ValueError):
    pass


class IoFailure(LevitodynError, OSError):
    pass
