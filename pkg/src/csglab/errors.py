"""Exception types raised across the library.

Every contract violation gets its own class so callers can catch precisely;
all inherit from CsgError.
"""


class CsgError(Exception):
    pass


# distributions
class NonPositiveProb(CsgError):
    pass


class SumNotOne(CsgError):
    pass


# games
class IllegalAction(CsgError):
    pass


class UnknownName(CsgError):
    pass


class BadParams(CsgError):
    pass


# strategy machines
class ModeOutOfRange(CsgError):
    pass


class BadEpsilon(CsgError):
    pass


class NotFiniteMemory(CsgError):
    pass


class KNotFound(CsgError):
    """Transient-mass bound unreachable within the search cap; almost always a
    modeling bug in the game or the fixed strategy."""


class UndecidableTail(CsgError):
    pass


# transformations
class BotCollision(CsgError):
    pass


class GridTooCoarse(CsgError):
    pass


class UnsupportedAction(CsgError):
    pass


class NotInfiniteBranchingSpec(CsgError):
    pass


class NotTurnBased(CsgError):
    pass


# solvers
class PrivateMemory(CsgError):
    pass


class HorizonRequired(CsgError):
    pass


class NoProgress(CsgError):
    pass


class TruncationTooSmall(CsgError):
    pass


# exact chain analysis
class SingularSystem(CsgError):
    pass


class OutOfRange(CsgError):
    pass


# monte carlo
class EventNotPrefixDecidable(CsgError):
    pass


class TooFewReturns(CsgError):
    pass


class WindowTooLarge(CsgError):
    pass


# cli / experiments
class ConfigInvalid(CsgError):
    pass


class AssertionFailed(CsgError):
    pass
