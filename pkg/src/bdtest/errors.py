"""Exception types shared across the package."""


class CapacityError(ValueError):
    """An exact oracle was asked to handle an instance above its size cap."""


class DegenerateRangeError(ValueError):
    """Distance requested for a function whose declared range has zero width."""


class UnsupportedBoundsError(ValueError):
    """A reduction or tester requires bounds it cannot work with (e.g. infinite)."""


class PreconditionError(ValueError):
    """A checked precondition of an operation does not hold for the input."""


class GenerationError(RuntimeError):
    """Instance generation could not reach the requested target.

    Carries the best distance achieved so the caller can decide whether
    to retry with a different seed or accept the weaker instance.
    """

    def __init__(self, message: str, best_eps: float | None = None):
        super().__init__(message)
        self.best_eps = best_eps
