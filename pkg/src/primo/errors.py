"""Exception types shared across the package."""


class PrimoError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PrimoError, ValueError):
    """An argument lies outside the domain of an operation."""


class ParseError(PrimoError, ValueError):
    """A file does not follow its documented format."""


class ProtocolError(PrimoError, RuntimeError):
    """A stateful component was driven in an order it does not allow."""


class NumericError(PrimoError, ArithmeticError):
    """A numerical routine failed (e.g. a Cholesky factorization)."""


class BenchmarkError(PrimoError, RuntimeError):
    """A benchmark evaluation failed."""


class MissingDataError(PrimoError, LookupError):
    """Inputs a command needs (result cells, prior files) are absent."""
