"""Exception hierarchy for nullity_lab."""


class NullityLabError(Exception):
    """Base class for all library errors."""


class ZeroVector(NullityLabError, ValueError):
    pass


class DimensionMismatch(NullityLabError, ValueError):
    pass


class OutOfDomain(NullityLabError, ValueError):
    pass


class NotImmersedAtPoint(NullityLabError):
    pass


class PositionTangent(NullityLabError):
    pass


class NonzeroBaseNullity(NullityLabError):
    pass


# the involution uses the same condition on its input
NonzeroNullity = NonzeroBaseNullity


class WrongHolomorphyClass(NullityLabError):
    pass


class SingularFiberPoint(NullityLabError):
    pass


class WrongBaseDimension(NullityLabError, ValueError):
    pass


class OriginOnImage(NullityLabError):
    pass


class ChartUndefined(NullityLabError, ValueError):
    pass


class UnknownFixture(NullityLabError, KeyError):
    pass


class GenerationFailed(NullityLabError):
    pass


class NumericalInconsistency(NullityLabError):
    """Two independent routes to the same quantity disagree."""


class SpecError(NullityLabError, ValueError):
    """Malformed immersion spec file."""
