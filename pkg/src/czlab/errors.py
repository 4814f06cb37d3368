"""Exception hierarchy shared by all czlab modules."""


class CzlabError(Exception):
    """Base class for every error raised by czlab."""


class NotSelfAdjoint(CzlabError, ValueError):
    pass


class NotPositive(CzlabError, ValueError):
    pass


class ZeroElement(CzlabError, ValueError):
    pass


class Invertible(CzlabError, ValueError):
    pass


class TrivialAlgebra(CzlabError, ValueError):
    pass


class InvalidPair(CzlabError, ValueError):
    pass


class NotCommuting(CzlabError, ValueError):
    pass


class PreconditionViolated(CzlabError, ValueError):
    pass


class WrongShape(CzlabError, ValueError):
    pass


class NotAVertex(CzlabError, ValueError):
    pass


class NotInfinite(CzlabError, ValueError):
    pass


class SpaceMismatch(CzlabError, ValueError):
    pass


class ProductNotZeroOnN(CzlabError, ValueError):
    pass


class OutOfRange(CzlabError, ValueError):
    pass


class GridTooCoarse(CzlabError, ValueError):
    pass


class NotRankOne(CzlabError, ValueError):
    pass


class WrongDimension(CzlabError, ValueError):
    pass


class DepthCapExceeded(CzlabError, LookupError):
    """No path was found within the depth cap.

    This is *not* a proof that no path exists: neighbor generation is
    constructive, not exhaustive. ``exhausted`` records whether the generated
    neighborhood ran dry before the cap was reached.
    """

    def __init__(self, message: str, *, exhausted: bool = False):
        super().__init__(message)
        self.exhausted = exhausted


class UnknownSuite(CzlabError, KeyError):
    pass


class InvalidConfig(CzlabError, ValueError):
    pass


class ParseError(CzlabError, ValueError):
    """Malformed EPSet text; ``position`` is the 0-based offending offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position
