"""Exception hierarchy.

Every error raised on bad input derives from :class:`CoinFlipError`, which
is itself a ``ValueError`` so callers that only care about "bad argument"
can catch that.
"""


class CoinFlipError(ValueError):
    """Base class for all package errors."""


# fock
class OccupationExceedsTruncation(CoinFlipError):
    pass


class WrongModeCount(CoinFlipError):
    pass


class ModeOutOfRange(CoinFlipError):
    pass


class EfficiencyOutOfRange(CoinFlipError):
    pass


class PatternModeMismatch(CoinFlipError):
    pass


class TruncationTooSmall(CoinFlipError):
    pass


# protocol
class XOutOfFairRange(CoinFlipError):
    pass


class DegenerateDenominator(CoinFlipError):
    pass


# adversary
class DegenerateEfficiency(CoinFlipError):
    pass


class NoRootInUnitInterval(CoinFlipError):
    pass


# solver
class NoFairParameter(CoinFlipError):
    pass


class YOutOfUnitInterval(CoinFlipError):
    pass


class XOutOfUnitInterval(CoinFlipError):
    pass


class NoConvergence(CoinFlipError):
    pass


class ConfigError(CoinFlipError):
    """Malformed or inconsistent run configuration."""
