"""Exception hierarchy shared by every subsystem."""


class ForgeError(Exception):
    """Base class for all library errors."""

    #: CLI exit code used when this error escapes to the command line
    exit_code = 1


class HypothesisFailure(ForgeError):
    """An input does not satisfy the preconditions of a construction."""

    exit_code = 2


class Tripwire(ForgeError):
    """An internal consistency check failed; indicates a bug, not bad input."""

    exit_code = 3


class UnsupportedOrder(ForgeError):
    pass


class GeometryAxiomError(Tripwire):
    pass


class UnknownPanel(ForgeError, KeyError):
    pass


class UnknownFlag(ForgeError, KeyError):
    pass


class GeometryMismatch(ForgeError):
    pass


class TypePreservationViolation(HypothesisFailure):
    pass


class ClosureCapExceeded(ForgeError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DichotomyViolated(Tripwire):
    def __init__(self, message, instance=None):
        super().__init__(message)
        self.instance = instance


class DegenerateDirection(ForgeError):
    pass


class PrecisionExhausted(ForgeError):
    pass


class SingularBasis(ForgeError):
    pass


class BoundaryVertex(ForgeError):
    pass


class EmptyOnBall(ForgeError):
    pass


class NotDisjoint(HypothesisFailure):
    pass


class EmptyInput(HypothesisFailure):
    pass


class NotElliptic(HypothesisFailure):
    pass


class ClosestPairViolated(HypothesisFailure):
    pass


class UnsupportedDirection(HypothesisFailure):
    pass


class ContradictionDetected(Tripwire):
    pass


class ReplayMismatch(Tripwire):
    pass


class NotAnAutomorphism(ForgeError, ValueError):
    pass
