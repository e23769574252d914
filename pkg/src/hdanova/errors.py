"""Exception and warning types raised across the package."""


class HdAnovaError(Exception):
    """Base class for all package errors."""


class MalformedData(HdAnovaError, ValueError):
    pass


class ShapeMismatch(HdAnovaError, ValueError):
    pass


class TooShort(HdAnovaError, ValueError):
    pass


class InvalidArgument(HdAnovaError, ValueError):
    pass


class BandwidthError(HdAnovaError, ValueError):
    pass


class NoAdmissibleBandwidth(BandwidthError):
    pass


class DegenerateInput(HdAnovaError, ValueError):
    pass


class NumericalFailure(HdAnovaError, ArithmeticError):
    pass


class DegenerateVariance(UserWarning):
    """All bootstrap draws coincide; the quantile carries no information."""


class BandwidthClamped(UserWarning):
    """The requested upper bandwidth exceeded the shortest group and was reduced."""


class ExperimentFailure(HdAnovaError, RuntimeError):
    """A Monte Carlo replicate raised; the message names the replicate."""
