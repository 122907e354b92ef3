"""Exception hierarchy shared by every module."""


class KRNavError(Exception):
    """Base class for all package errors."""


class InputError(KRNavError, ValueError):
    """Malformed or out-of-contract input (dimension mismatch, bad parameter)."""


class DomainError(InputError):
    """Point lies outside the free space beyond the configured tolerance."""


class NumericalError(KRNavError, ArithmeticError):
    """A numerical routine failed (non-convergence, non-positive denominator)."""


class GenerationError(KRNavError, RuntimeError):
    """Random world/objective generation exhausted its redraw budget."""


class ContractError(KRNavError, AssertionError):
    """An operation precondition that the caller was responsible for was violated."""
