"""Exception hierarchy shared by all modules."""


class SeshadriLabError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatchError(SeshadriLabError, ValueError):
    pass


class NotAnObstructionError(SeshadriLabError, ValueError):
    pass


class InvalidTransformError(SeshadriLabError, ValueError):
    pass


class InvalidParameterError(SeshadriLabError, ValueError):
    pass


class PreconditionError(SeshadriLabError, ValueError):
    pass


class InvalidConfigurationError(SeshadriLabError, ValueError):
    """Points coincide, or a point has all homogeneous coordinates zero."""


class SurjectivityRequiredError(SeshadriLabError, ValueError):
    """The jet evaluation map is not onto, so no basis split exists."""


class ZeroSectionError(SeshadriLabError, ValueError):
    pass


class InvariantViolationError(SeshadriLabError, AssertionError):
    pass


class NumericalInstabilityError(SeshadriLabError, ArithmeticError):
    pass


class RangeError(SeshadriLabError, OverflowError):
    pass


class BoundInconsistencyError(SeshadriLabError, AssertionError):
    """Packing volumes exceed the ambient volume: the Seshadri bounds are wrong."""
