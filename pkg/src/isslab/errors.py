"""Exception hierarchy shared by every isslab module."""


class IsslabError(Exception):
    """Base class for all isslab errors."""


class NumericError(IsslabError):
    """A computation produced or would produce an unusable number."""


class NoBracket(NumericError):
    """Bracket expansion could not reach the requested value."""


class NonMonotone(NumericError):
    """A function expected to be increasing was seen decreasing."""


class NonFinite(NumericError):
    """An integration stage produced NaN or infinity."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class NonPositiveRate(NumericError):
    """A rate function that must stay positive was not."""


class NoConvergence(NumericError):
    """An iterative linear-algebra routine hit its iteration cap."""


class DefinitenessViolated(NumericError):
    """A sampled eigenvalue crossed zero under a definiteness assertion."""

    def __init__(self, message, witness=None, value=None):
        super().__init__(message)
        self.witness = witness
        self.value = value


class DimMismatch(IsslabError, ValueError):
    """State/input dimensions do not agree with the model."""


class GridMismatch(IsslabError, ValueError):
    """Two sampled objects do not live on the same time grid."""


class EmptyGrid(IsslabError, ValueError):
    """A verification grid had no usable points."""


class DomainError(IsslabError, ValueError):
    """A model was evaluated outside its admissible region."""


class MissingEquilibriumMap(IsslabError, ValueError):
    """An operation needs an equilibrium map the model does not carry."""


class NotScalar(IsslabError, ValueError):
    """An operation restricted to scalar systems got a vector one."""


class UnknownExample(IsslabError, KeyError):
    """Requested example is not in the registry."""

    def __init__(self, name, known):
        self.name = name
        self.known = tuple(known)
        super().__init__(f"unknown example {name!r}; registered: {', '.join(self.known)}")

    def __str__(self):
        return self.args[0]


class ParseError(IsslabError, ValueError):
    """Scenario text could not be parsed."""

    def __init__(self, reason, line=None, key=None):
        self.reason = reason
        self.line = line
        self.key = key
        where = f"line {line}: " if line is not None else ""
        what = f"{key}: " if key else ""
        super().__init__(f"{where}{what}{reason}")


class DomainEdge(UserWarning):
    """Finite difference fell back to a one-sided, first-order formula."""
