"""Shared exception types."""


class MinjointError(Exception):
    """Base class for errors raised by this package."""


class EnumerationCapError(MinjointError):
    """A combinatorial enumeration would exceed the configured budget."""


class UnboundedSystemError(MinjointError):
    """Vertex enumeration was asked for on an unbounded system."""


class NumericalError(MinjointError):
    """A computed quantity failed its residual or sanity check."""


class SimplexCycleError(NumericalError):
    """Simplex iteration guard exceeded; should not happen under Bland's rule."""


class ConsistencyError(MinjointError):
    """Two decision paths that must agree returned different verdicts."""
