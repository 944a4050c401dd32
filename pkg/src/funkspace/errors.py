"""Exception types shared across the package."""


class FunkspaceError(Exception):
    """Base class for all funkspace errors."""


class DimensionMismatch(FunkspaceError):
    """Operands live in different ambient dimensions."""


class ValidationError(FunkspaceError):
    """Constructed object or parsed input violates an invariant."""


class ParseError(FunkspaceError):
    """Input text is not a well-formed scene."""


class PointNotInterior(FunkspaceError):
    """A point required to be interior to the body/domain is not."""


class PointNotOnBoundary(FunkspaceError):
    """A point required to lie on the boundary does not."""


class PointOutsideHalfspace(FunkspaceError):
    """A point required to be strictly inside a halfspace is not."""


class PointOnGeodesic(FunkspaceError):
    """A point required to be off a geodesic line lies on it."""


class CoincidentPoints(FunkspaceError):
    """Two points required to be distinct coincide."""


class InvalidHPoint(FunkspaceError):
    """Coordinates do not satisfy the hyperboloid constraint."""


class InvalidTangent(FunkspaceError):
    """Tangent vector is not Minkowski-orthogonal to its base point or not unit."""


class Unbounded(FunkspaceError):
    """Support value is infinite in the requested direction."""


class FiniteHitsRequired(FunkspaceError):
    """Both boundary hits must exist but at least one ray never exits."""


class NumericFailure(FunkspaceError):
    """A numerical routine failed to converge within its budget."""


class UnknownPoint(FunkspaceError):
    """Named point is absent from the scene."""


class MetricSpaceMismatch(FunkspaceError):
    """Requested metric is not defined for the scene's space."""


class RadiusUnreachable(FunkspaceError):
    """No point at the requested metric radius exists along the ray."""
