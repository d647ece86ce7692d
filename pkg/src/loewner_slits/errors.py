"""Exception hierarchy shared by all modules."""


class LoewnerError(Exception):
    """Base class for errors raised by this package."""


class DomainError(LoewnerError, ValueError):
    """A driving term was evaluated outside its time domain."""


class HullCollisionError(LoewnerError):
    """A forward-evolved point reached the slit (too close to the driving value, or swallowed)."""

    def __init__(self, step, value, lam):
        self.step = step
        self.value = value
        self.lam = lam
        super().__init__(
            f"hull collision at step {step}: image {value!r} reached the slit (lambda={lam!r})"
        )


class ConsistencyError(LoewnerError):
    """An internal ordering/branch invariant was violated."""


class GeometryError(LoewnerError):
    """The zipper met a curve vertex that is not strictly above the real line."""

    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(
            f"curve vertex {index} maps to {value!r}, which is not in the upper half-plane "
            "(self-intersection or contact with the real axis)"
        )


class DivergenceError(LoewnerError):
    """The bound-sequence recurrence left its domain of definition."""

    def __init__(self, message, kp=None, kpp=None):
        self.kp = list(kp or [])
        self.kpp = list(kpp or [])
        super().__init__(message)
