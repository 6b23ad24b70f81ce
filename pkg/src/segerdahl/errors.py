"""Exception types raised across the package."""


class SegerdahlError(Exception):
    """Base class for all package errors."""


class DomainError(SegerdahlError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class ContractError(SegerdahlError, ValueError):
    """A precondition of an operation was violated by the caller."""


class EvaluationError(SegerdahlError, ArithmeticError):
    """A series, quadrature or root-finder did not converge.

    ``args_`` keeps the offending arguments so failures can be reproduced.
    """

    def __init__(self, message, **args_):
        super().__init__(message)
        self.args_ = args_

    def __str__(self):
        base = super().__str__()
        if not self.args_:
            return base
        detail = ", ".join(f"{k}={v!r}" for k, v in self.args_.items())
        return f"{base} ({detail})"


class DiagnosticError(SegerdahlError, ArithmeticError):
    """A computed probability left [0, 1] by more than the allowed slack."""


class StiffnessError(SegerdahlError, ArithmeticError):
    """The boundary-value system is too ill-conditioned to solve reliably."""


class RefinementError(SegerdahlError, ArithmeticError):
    """Grid refinement changed the answer by more than the requested tolerance.

    Both the coarse and the refined solutions are attached.
    """

    def __init__(self, message, coarse=None, fine=None):
        super().__init__(message)
        self.coarse = coarse
        self.fine = fine


class InversionUnstableError(SegerdahlError, ArithmeticError):
    """Gaver-Stehfest estimates at two orders disagree beyond tolerance."""

    def __init__(self, message, estimate=None, previous=None):
        super().__init__(message)
        self.estimate = estimate
        self.previous = previous


class ExplosionError(SegerdahlError, ArithmeticError):
    """The deterministic flow reaches infinity in finite time."""
