"""Exception hierarchy.

Two families: :class:`ValidationError` for inputs that violate an
operation's preconditions (CLI exit code 2) and :class:`InvariantError` for
numerical outcomes that contradict a proven bound or an internal contract
(CLI exit code 3).
"""


class DevurError(Exception):
    exit_code = 1


class ValidationError(DevurError, ValueError):
    exit_code = 2


class InvariantError(DevurError, RuntimeError):
    exit_code = 3


class NotHermitian(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class InvalidState(ValidationError):
    pass


class InvalidAlpha(ValidationError):
    pass


class NotOrthogonal(ValidationError):
    pass


class MixedStateUnsupported(ValidationError):
    pass


class NeedOverlapConstant(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class ConstraintViolated(ValidationError):
    pass


class ParamOutOfRange(ValidationError):
    pass


class GridTooCoarse(ValidationError):
    pass


class NonrealExpectation(InvariantError):
    pass


class NoConvergence(InvariantError):
    pass


class InternalViolation(InvariantError):
    pass


class BoundViolated(InternalViolation):
    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class PatchInfeasible(InvariantError):
    pass


class SeriesNotConverged(InvariantError):
    pass


class Cancelled(DevurError):
    pass
