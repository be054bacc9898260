"""Exception types shared across the package."""


class SubsearchError(Exception):
    """Base class for all package errors."""


class DomainError(SubsearchError, ValueError):
    """An argument lies outside the unit-interval type space."""


class DegenerateTruncationError(SubsearchError, ValueError):
    """Conditioning on t >= x with essentially no mass left (1 - F(x) below floor)."""


class InvalidParamsError(SubsearchError, ValueError):
    """Market primitives violate the admissibility restrictions."""


class PriceZeroError(SubsearchError, ValueError):
    """The separating schedule is undefined at a zero subsidy price."""


class CutoffRangeError(SubsearchError, ValueError):
    """Requested participation cutoff lies outside the feasible family range."""


class BracketError(SubsearchError, RuntimeError):
    """A root bracket failed its sign conditions (quadrature tolerance too loose)."""


class EnumerationSizeError(SubsearchError, ValueError):
    """Problem too large for exhaustive enumeration."""


class DensityUndefinedError(SubsearchError, ValueError):
    """Density (and hence the virtual value) is not defined at the requested point."""
