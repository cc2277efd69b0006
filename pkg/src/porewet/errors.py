"""Exception types shared across the package."""


class PorewetError(Exception):
    """Base class for errors raised by porewet."""


class ParameterError(PorewetError, ValueError):
    """A parameter violates its documented constraints."""


class DimensionError(PorewetError, ValueError):
    """A grid, mesh, or phantom does not satisfy the required shape or containment."""
