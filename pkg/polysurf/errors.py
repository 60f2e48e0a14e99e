"""Exception hierarchy for polysurf."""

from typing import Any, Optional


class PolysurfError(Exception):
    """Base class for every error raised by polysurf."""

    exit_code = 2

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details


# Geometry

class GeometryError(PolysurfError):
    """A cell complex violates a surface invariant."""


class InvalidCell(GeometryError):
    pass


class UnknownEdge(GeometryError):
    pass


class LengthMismatch(GeometryError):
    pass


class DuplicateGluing(GeometryError):
    pass


class Disconnected(GeometryError):
    pass


class BadOrientation(GeometryError):
    """A gluing map leaves both cells on the same side of the glued edge."""


class MapMismatch(GeometryError):
    """A gluing map does not carry one side onto the other."""


class NonOrientable(GeometryError):
    pass


class EmptyGlueSet(GeometryError):
    pass


# Holonomy

class HolonomyError(PolysurfError):
    pass


class IrrationalSurface(HolonomyError):
    pass


class InfiniteGroup(HolonomyError):
    pass


class HolonomyInconsistency(HolonomyError):
    """Exact generators failed to close as predicted. Always a bug."""


# Unfolding

class UnfoldingError(PolysurfError):
    pass


class NontrivialHolonomy(UnfoldingError):
    pass


class NotSquareTiled(UnfoldingError):
    pass


class NotLatticeDrawn(UnfoldingError):
    pass


# Flow

class FlowError(PolysurfError):
    pass


class DegenerateDirection(FlowError):
    pass


class EscapedCell(FlowError):
    pass


class NoReturn(FlowError):
    pass


class OffSection(FlowError):
    """A cross-section point does not lie on the section or points out of it."""


class SingularHitError(FlowError):
    """A trajectory ran into a singular vertex."""

    def __init__(self, message: str, event: Optional[Any] = None, **details: Any):
        super().__init__(message, **details)
        self.event = event


# Skew products

class SkewError(PolysurfError):
    pass


class NonTransversal(SkewError):
    pass


class NotPeriodic(SkewError):
    pass


# Catalog

class CatalogError(PolysurfError):
    pass


class UnknownFamily(CatalogError):
    pass


class ParamOutOfRange(CatalogError):
    pass


class BarrierCollision(CatalogError):
    pass


class SurfaceFormatError(PolysurfError):
    """Malformed surface description file."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, line=line)
        self.line = line
