"""Exception hierarchy shared by all pipeline stages."""


class RepfibError(Exception):
    """Base class for every error raised by this package."""


class PrecisionError(RepfibError):
    """A certified decision could not be made at the current precision.

    Callers catch this family to escalate precision.
    """


class AmbiguousSign(PrecisionError):
    pass


class AmbiguousNearest(PrecisionError):
    pass


class AmbiguousFloor(PrecisionError):
    pass


class PrecisionExhausted(RepfibError):
    pass


class InvalidRepdigit(RepfibError, ValueError):
    pass


class ZeroDenominator(RepfibError, ZeroDivisionError):
    pass


class HeightCheckFailed(RepfibError):
    pass


class HypothesisFailed(RepfibError):
    pass


class NoPositiveEpsilon(RepfibError):
    def __init__(self, message: str, stage: str | None = None):
        super().__init__(message)
        self.stage = stage
