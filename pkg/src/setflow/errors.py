"""Exception hierarchy.

Input problems derive from :class:`InvalidInput` (also a ``ValueError``);
violated mathematical invariants derive from :class:`InvariantViolation`.
The CLI maps the first family to exit code 3 and the second to exit code 2.
"""


class SetFlowError(Exception):
    pass


class InvalidInput(SetFlowError, ValueError):
    pass


class InvariantViolation(SetFlowError, RuntimeError):
    pass


# body2d
class NonConvexInput(InvalidInput):
    pass


class DegenerateInput(InvalidInput):
    pass


class GridMismatch(InvalidInput):
    pass


class SingularOperator(InvalidInput):
    pass


class NonPositiveScale(InvalidInput):
    pass


# geomfun
class DegenerateBody(InvalidInput):
    pass


class LPInfeasible(InvariantViolation):
    pass


# sde
class NotRotation(InvalidInput):
    pass


class GridIncompatible(InvalidInput):
    pass


class NegativeTime(InvalidInput):
    pass


class NotStableOperator(InvalidInput):
    pass


class ConvexityViolation(InvariantViolation):
    pass


# compsys
class BadOrder(InvalidInput):
    pass


# lab
class NotPeriodic(InvalidInput):
    pass


class NotInManifold(InvalidInput):
    pass


class GenerationFailed(SetFlowError):
    pass
