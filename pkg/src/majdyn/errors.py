"""Exception taxonomy.

Two families matter to callers: ``ValidationError`` (bad input, exit code 2
from the CLI) and ``TheoremViolation`` (a run contradicted a guaranteed
property, exit code 3).
"""


class MajDynError(Exception):
    pass


class ValidationError(MajDynError, ValueError):
    pass


class TheoremViolation(MajDynError):
    pass


# graph construction


class EvenDegree(ValidationError):
    def __init__(self, vertex, degree):
        self.vertex = vertex
        self.degree = degree
        super().__init__(f"vertex {vertex} has even degree {degree}")


class DegreeExceeded(ValidationError):
    def __init__(self, vertex, degree, d_max):
        self.vertex = vertex
        self.degree = degree
        super().__init__(f"vertex {vertex} has degree {degree} > d_max={d_max}")


class Disconnected(ValidationError):
    pass


class DuplicateEdge(ValidationError):
    pass


class CannotNormalize(ValidationError):
    def __init__(self, vertex, degree, cap):
        self.vertex = vertex
        super().__init__(
            f"vertex {vertex}: degree {degree} is even and a self-loop would exceed cap {cap}"
        )


class InvalidParams(ValidationError):
    pass


class NotSeparating(ValidationError):
    pass


class NotRegular(ValidationError):
    pass


class DegenerateComponent(ValidationError):
    pass


class GraphFormatError(ValidationError):
    pass


# dynamics


class SizeMismatch(ValidationError):
    pass


class HorizonExceeded(TheoremViolation):
    pass


class FlipBudgetExceeded(TheoremViolation):
    pass


# lyapunov


class NotDLegal(TheoremViolation):
    pass


class MissingEdgeWeight(ValidationError):
    pass


class TruncatedProfile(UserWarning):
    """Raised as a warning: the bound was computed from a truncated sphere profile."""


# retention


class InvalidP(ValidationError):
    pass


class InsufficientTrials(MajDynError):
    pass


class MissingData(ValidationError):
    pass


class WNotLargeEnough(MajDynError):
    pass
