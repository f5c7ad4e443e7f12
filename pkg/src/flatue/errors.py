"""Exception hierarchy.

Every domain failure raised by the library derives from :class:`FlatSurfaceError`
so the command line can map it to exit code 1.
"""


class FlatSurfaceError(Exception):
    """Base class for all domain errors."""


class AngleNotMultipleOfPi(FlatSurfaceError):
    pass


class SingularMatrix(FlatSurfaceError):
    pass


class DegeneratePolygon(FlatSurfaceError):
    pass


class FlipLimitExceeded(FlatSurfaceError):
    pass


class BranchedCover(FlatSurfaceError):
    pass


class NotClosed(FlatSurfaceError):
    pass


class NotSimple(FlatSurfaceError):
    pass


class PointOffSurface(FlatSurfaceError):
    pass


class SearchBudgetExceeded(FlatSurfaceError):
    pass


class NoConePoints(FlatSurfaceError):
    pass


class ResolutionTooCoarse(FlatSurfaceError):
    pass


class IterationLimit(FlatSurfaceError):
    pass


class StartAtConePoint(FlatSurfaceError):
    pass


class CylinderDetected(FlatSurfaceError):
    pass


class BudgetExceeded(FlatSurfaceError):
    pass


class BadParams(FlatSurfaceError):
    pass


class InvalidSurface(FlatSurfaceError):
    pass


class SurfaceSyntaxError(FlatSurfaceError):
    """Malformed surface file; ``line`` is 1-based."""

    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownEdge(SurfaceSyntaxError):
    pass


class DuplicateGluing(FlatSurfaceError):
    def __init__(self, edge, lines):
        joined = ", ".join(str(n) for n in lines)
        super().__init__(f"edge {edge} glued more than once (lines {joined})")
        self.edge = edge
        self.lines = tuple(lines)
