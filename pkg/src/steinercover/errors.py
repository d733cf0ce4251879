"""Exception types shared across the package."""


class InvalidPointError(ValueError):
    """A point does not belong to the space it is used with."""


class UnsupportedSpaceError(ValueError):
    """The requested computation has no exact pathway for this space."""


class EnumerationLimitError(RuntimeError):
    """A combinatorial enumeration exceeded its guard."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap.

    ``best`` carries the best value seen so far, ``positions`` the matching
    iterate.
    """

    def __init__(self, message, best=None, positions=None):
        super().__init__(message)
        self.best = best
        self.positions = positions


class VerificationFailure(RuntimeError):
    """A computed quantity violated one of the proven inequalities."""
