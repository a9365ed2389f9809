"""Exception hierarchy shared across the package."""


class HopsensError(Exception):
    """Base class for all library errors."""


class GraphFormatError(HopsensError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GraphInvariantError(GraphFormatError):
    """A well-formed input that violates a Graph invariant."""

    kind = "InvariantViolation"


class NegativeWeight(GraphInvariantError):
    kind = "NegativeWeight"


class SelfLoop(GraphInvariantError):
    kind = "SelfLoop"


class DuplicateEdge(GraphInvariantError):
    kind = "DuplicateEdge"


class VertexOutOfRange(GraphInvariantError):
    kind = "VertexOutOfRange"


class Unreachable(HopsensError):
    def __init__(self, s, t):
        self.s, self.t = s, t
        super().__init__(f"vertex {t} is not reachable from {s}")


class KeyCollision(HopsensError):
    """Two distinct shortest paths received identical tiebreak key sums."""


class InconsistentRouting(HopsensError):
    pass


class TruncationInvalid(HopsensError):
    pass


class RetryExhausted(HopsensError):
    pass


class MissingSpan(HopsensError):
    pass


class InvalidSpan(HopsensError):
    pass


class BudgetExceeded(HopsensError):
    def __init__(self, message, lower_bound):
        self.lower_bound = lower_bound
        super().__init__(message)


class HopBoundUnmet(HopsensError):
    pass


class ParameterViolation(HopsensError):
    pass


class ScaleViolation(HopsensError):
    pass
