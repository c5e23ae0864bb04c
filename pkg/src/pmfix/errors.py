"""Exception hierarchy shared by every pmfix module."""

from __future__ import annotations


class PmfixError(Exception):
    """Base class for all library errors."""


class MalformedTable(PmfixError, ValueError):
    """Distance table is not square, is empty, or holds negative/non-finite entries."""


class UnknownPoint(PmfixError, LookupError):
    """A point does not belong to the space."""


class InvalidSpace(PmfixError):
    """The partial metric axioms fail, so a result that depends on them is void."""


class NonPositiveRadius(PmfixError, ValueError):
    pass


class NegativeArgument(PmfixError, ValueError):
    pass


class NonPositivePoint(PmfixError, ValueError):
    pass


class ExpressionDomainError(PmfixError, ArithmeticError):
    """A user expression is undefined (or non-finite) at the requested argument."""


class ExpressionSyntaxError(PmfixError, ValueError):
    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()):
        self.position = position
        self.expected = tuple(expected)
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at offset {position}{detail}")


class EmptyPrefix(PmfixError, ValueError):
    pass


class InvalidMap(PmfixError, ValueError):
    """Self-map is not total on the space or leaves it."""


class SamplerExhausted(PmfixError):
    """A sampler produced no usable points for a continuous check."""


class NotDFixed(PmfixError):
    """A point passed as d-fixed does not satisfy d(z, Tz) = d(z, z)."""


class BudgetExhausted(PmfixError):
    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class ConclusionViolated(PmfixError):
    """A theorem conclusion failed on a run whose hypotheses were accepted."""

    def __init__(self, conclusion: str, detail: str, trace=None):
        super().__init__(f"{conclusion}: {detail}")
        self.conclusion = conclusion
        self.detail = detail
        self.trace = trace


class HypothesisFailed(PmfixError):
    def __init__(self, hypothesis: str, detail: str = ""):
        super().__init__(f"hypothesis {hypothesis!r} failed" + (f": {detail}" if detail else ""))
        self.hypothesis = hypothesis
        self.detail = detail


class UniquenessViolated(PmfixError):
    def __init__(self, message: str, points=()):
        super().__init__(message)
        self.points = tuple(points)


class ConfigError(PmfixError, ValueError):
    """Invalid campaign or trial configuration."""


class HypothesisUnverified(UserWarning):
    """A theorem hypothesis was assumed rather than machine-checked."""


class MalformedInput(PmfixError, ValueError):
    """An input file or argument does not match its documented format."""
