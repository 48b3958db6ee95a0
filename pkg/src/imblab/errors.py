"""Exception hierarchy shared by every imblab module."""


class ImblabError(Exception):
    """Base class for all library errors."""


class NotPositiveDefinite(ImblabError, ValueError):
    pass


class InvalidRatio(ImblabError, ValueError):
    pass


class EmptyClass(ImblabError, ValueError):
    pass


class DegenerateMinority(ImblabError, ValueError):
    pass


class DimensionMismatch(ImblabError, ValueError):
    pass


class NonFiniteLoss(ImblabError, FloatingPointError):
    """Optimization produced a NaN/Inf loss (usually bad hyperparameters)."""


class WrongParadigm(ImblabError, ValueError):
    pass


class SampleTooSmall(ImblabError, ValueError):
    """Too few held-out class-0 points for the requested (alpha, delta)."""


class LengthMismatch(ImblabError, ValueError):
    pass


class InvalidLabel(ImblabError, ValueError):
    pass


class EmptyInput(ImblabError, ValueError):
    pass


class MissingClass(ImblabError, ValueError):
    pass


class ConfigError(ImblabError, ValueError):
    pass


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    pass


class NoData(ImblabError, ValueError):
    pass
