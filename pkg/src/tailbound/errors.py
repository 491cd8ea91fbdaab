"""Semantic exceptions shared across the package."""


class TailboundError(Exception):
    """Base error for this package."""


class DomainError(TailboundError, ValueError):
    """Inputs violate a mathematical precondition (wrong sign, out of range)."""


class WindowError(DomainError):
    """Requested evaluation point lies outside a bound's stated validity window."""


class UnsupportedFamilyError(TailboundError, ValueError):
    """The requested operation has no implementation for this family."""


class TruncationError(TailboundError, ArithmeticError):
    """A truncated series or enumeration cannot reach the requested accuracy."""
