"""Exception hierarchy shared by all modules."""


class PhasemajError(Exception):
    """Base class for every error raised by this package."""


class NonZeroDirac(PhasemajError, ValueError):
    pass


class DiracAtPoint(PhasemajError, ValueError):
    pass


class NotNormalized(PhasemajError, ValueError):
    pass


class BoundExceeded(PhasemajError, ValueError):
    pass


class IdentityViolation(PhasemajError, AssertionError):
    """An exact identity that must hold did not (implementation bug)."""


class NotMajorized(PhasemajError, ValueError):
    pass


class TailTooHeavy(PhasemajError, ValueError):
    pass


class Unstable(PhasemajError, RuntimeError):
    """Majorization verdicts disagree between the last two grid refinements."""


class NegativeInput(PhasemajError, ValueError):
    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class TheoremViolation(PhasemajError, AssertionError):
    """A theorem's hypotheses hold but its conclusion failed.

    Never expected; carries the offending instance so it can be dumped.
    """

    def __init__(self, message, instance=None):
        super().__init__(message)
        self.instance = instance


class ConstructionFailure(PhasemajError, RuntimeError):
    pass


class EntryConditionsFailed(PhasemajError, ValueError):
    pass


class SuffixConditionFailed(PhasemajError, ValueError):
    def __init__(self, message, delta_z=None, index=None):
        super().__init__(message)
        self.delta_z = delta_z
        self.index = index


class ConvergenceViolation(PhasemajError, AssertionError):
    pass


class Lemma1Failure(PhasemajError, ValueError):
    """Raised when a vector has a negative suffix sum at index ``k``."""

    def __init__(self, k, suffix):
        super().__init__(f"suffix sum from index {k} is {suffix} < 0")
        self.k = k
        self.suffix = suffix


class ParseError(PhasemajError, ValueError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


NegativeWigner = NegativeInput
