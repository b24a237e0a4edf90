"""Exception hierarchy for the transseries engine."""


class TransseriesError(Exception):
    """Base class for all engine errors."""


class StructuralError(TransseriesError):
    """Malformed input: length mismatches, incompatible nodes, bad arguments."""


class NotInfinitesimal(TransseriesError):
    """An operation required a series/element with strictly positive valuation."""


class DivisionByZero(TransseriesError):
    """Inversion of a (certified) zero series or element."""


class TransbasisViolation(TransseriesError):
    """A transbasis axiom failed.  ``axiom`` is one of 'TB1', 'TB2', 'TB3'."""

    def __init__(self, axiom: str, message: str):
        self.axiom = axiom
        super().__init__(f"{axiom}: {message}")


class ConstantFieldExtensionNeeded(TransseriesError):
    """exp/log hit a nonzero constant part; adjoining e^c or log c is unsupported."""


class LinearResonance(TransseriesError):
    """A linear solve hit a root of the indicial polynomial with nonzero
    right-hand side; the distinguished solution needs a log extension."""


class BasisExtensionRequired(TransseriesError):
    """A distinguished solution does not lie in the current basis."""


class NotQuasiLinear(TransseriesError):
    """dsolve was asked to solve an equation that is not quasi-linear.

    Carries the valuation triple (v(P), v(P_[1]), v(P_[0])) when available.
    """

    def __init__(self, message, triple=None):
        self.triple = triple
        super().__init__(message)


class CrystallizationOverflow(TransseriesError):
    """A lower-level solution stream did not terminate within the term cap,
    so it cannot be represented as an exact field element."""


class EnumerationUnbounded(TransseriesError):
    """A grid certificate query has infinitely many points below the bound."""
