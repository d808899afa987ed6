"""Exception hierarchy shared by every module."""


class HypercurvError(Exception):
    """Base class for all errors raised by hypercurv."""


class ValidationError(HypercurvError, ValueError):
    """A hypergraph violates one of its structural invariants."""


class Disconnected(ValidationError):
    """Two vertices are not joined by any chain of hyperedges."""

    def __init__(self, x, y):
        super().__init__(f"hypergraph is disconnected: no path between {x} and {y}")
        self.x = x
        self.y = y


class ParseError(HypercurvError, ValueError):
    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class InvalidSpec(HypercurvError, ValueError):
    """Family parameters outside their admissible range."""


class NotAGraph(HypercurvError, ValueError):
    """An operation defined only for graphs got a hyperedge of size != 2."""


class UnsupportedStructure(HypercurvError, ValueError):
    """The hyperedge layout is not covered by a specialised routine."""


class SolverFailure(HypercurvError, RuntimeError):
    """An iterative solver exhausted its budget before certifying optimality."""


class LPFailure(SolverFailure):
    pass


class NonStabilized(HypercurvError, RuntimeError):
    """A lambda -> 0 extrapolation did not settle; ``table`` holds the raw values."""

    def __init__(self, message, table=None):
        super().__init__(message)
        self.table = table if table is not None else []
