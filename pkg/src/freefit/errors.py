"""Exception hierarchy shared by every freefit module."""


class FreefitError(Exception):
    """Base class for all library errors."""


class DomainError(FreefitError, ValueError):
    """An argument lies outside the domain of the operation."""


class CapacityError(FreefitError):
    """The requested Hilbert space is larger than the desk-scale guard allows."""


class UnsupportedPartitionError(DomainError):
    """The bipartition is not a contiguous leading block of sites."""


class SingularityError(DomainError):
    """A closed-form expression is evaluated at a singular point."""


class UnattainableDensityError(DomainError):
    """The target density needs an infinite potential to reproduce."""


class DegeneracyError(FreefitError):
    """A free ground state is degenerate, so no pure KS state exists."""


class ConvergenceError(FreefitError):
    """An iterative scheme hit its iteration limit.

    ``trace`` holds the residual history so callers can inspect how far
    the iteration got.
    """

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class SpectrumParseError(DomainError):
    """A spectrum file is malformed or not normalised."""
