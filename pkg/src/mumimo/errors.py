"""Exception hierarchy shared by every module of the package."""


class MumimoError(Exception):
    """Base class for all errors raised by :mod:`mumimo`."""


class ConvergenceFailure(MumimoError):
    pass


class RankDeficient(MumimoError):
    pass


class InsufficientNullity(MumimoError):
    pass


class DomainError(MumimoError, ValueError):
    pass


class ShapeMismatch(MumimoError, ValueError):
    pass


class TooManyStreams(MumimoError, ValueError):
    pass


class ZeroChannel(MumimoError, ValueError):
    pass


class IndexOutOfRange(MumimoError, IndexError):
    pass


class InvalidArguments(MumimoError, ValueError):
    pass


class TooLarge(MumimoError):
    """Exhaustive enumeration would exceed the configured evaluation cap."""


class StaleIntervals(MumimoError):
    """Mode intervals were computed for a different (M, N, P, noise) configuration."""


class InfeasibleMode(MumimoError):
    pass


class IoFailure(MumimoError, OSError):
    pass
