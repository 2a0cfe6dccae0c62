"""Exception types shared across the package."""


class LambdaLabError(Exception):
    """Base class for all package errors."""


class DyadicOverflowError(LambdaLabError, OverflowError):
    """A mantissa exceeded the fixed signed width.

    Arithmetic is exact or fails; there is no rounding fallback.
    """


class ParseError(LambdaLabError, ValueError):
    """Malformed textual input (dyadic literal, descriptor, rule)."""


class WindowTooLargeError(LambdaLabError):
    """An enumeration would exceed the configured point cap."""

    def __init__(self, requested, cap):
        super().__init__(f"enumeration of {requested} points exceeds cap {cap}")
        self.requested = requested
        self.cap = cap


class NestedThinningError(LambdaLabError):
    """Thinning an already thinned set is not supported."""


class GeneratorExhaustedError(LambdaLabError):
    """A generator-backed witness was queried beyond its known horizon."""


class RefinementError(LambdaLabError):
    """Partition refinement failed (non power-of-two level, zero gap)."""


class InsufficientLambdaError(LambdaLabError):
    """The point set ran out before the requested number of blocks."""


class ClaimVerificationError(LambdaLabError, AssertionError):
    """An exact claim check failed; carries the offending (x, n)."""

    def __init__(self, message, x=None, n=None):
        super().__init__(message)
        self.x = x
        self.n = n
