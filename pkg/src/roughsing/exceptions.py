"""Exception hierarchy shared by all roughsing modules."""


class RoughSingError(Exception):
    """Base class for every error raised by this package."""


class InvalidGrid(RoughSingError, ValueError):
    pass


class InvalidExponent(RoughSingError, ValueError):
    pass


class InvalidParameter(RoughSingError, ValueError):
    pass


class DomainError(RoughSingError, ValueError):
    pass


class GridTooCoarse(RoughSingError, ValueError):
    pass


class OutOfRange(RoughSingError, ValueError):
    pass


class GridMismatch(RoughSingError, ValueError):
    pass


class InvalidTruncation(RoughSingError, ValueError):
    pass


class UnsupportedOrder(RoughSingError, ValueError):
    pass


class InsufficientData(RoughSingError, ValueError):
    pass


class EmptyInput(RoughSingError, ValueError):
    pass


class PreconditionError(RoughSingError, ValueError):
    pass


class InvalidTriple(RoughSingError, ValueError):
    pass


class InvalidBand(RoughSingError, ValueError):
    pass


class OutOfScope(RoughSingError, ValueError):
    pass


class ConfigError(RoughSingError, ValueError):
    pass
