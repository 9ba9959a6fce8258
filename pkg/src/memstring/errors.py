"""Exception hierarchy.

``ConfigError`` covers bad input (CLI exit status 1); ``NumericalError``
covers failures of a numerical stage on valid input (exit status 2).
"""


class ConfigError(ValueError):
    """Invalid configuration or input data."""


class CoefficientPositivityError(ConfigError):
    """rho or alpha sampled non-positive."""


class KernelDomainError(ConfigError):
    """Kernel evaluated outside its sampled domain."""


class ResolutionError(ConfigError):
    """Time step too coarse for the requested frequency."""


class GridMismatchError(ConfigError):
    """Sampled data does not live on the model's time grid."""


class NumericalError(RuntimeError):
    """A numerical stage failed on otherwise valid input."""


class EigenOrderingError(NumericalError):
    pass


class DegenerateTraceError(NumericalError):
    pass


class DegeneratePoleError(NumericalError):
    pass


class IllPosedError(NumericalError):
    pass
