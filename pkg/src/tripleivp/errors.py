"""Exception hierarchy.

Everything the CLI maps to exit code 2 derives from :class:`InputError`;
everything mapped to exit code 3 derives from :class:`NumericalError`.
"""


class TripleIvpError(Exception):
    """Base class for all package errors."""


class InputError(TripleIvpError, ValueError):
    """Malformed or inconsistent user input."""


class NumericalError(TripleIvpError, ArithmeticError):
    """A computation could not produce a trustworthy finite result."""


class ExpressionSyntaxError(InputError):
    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        if self.expected:
            message = f"{message} at byte {offset}; expected one of {sorted(self.expected)}"
        else:
            message = f"{message} at byte {offset}"
        super().__init__(message)


class UnknownIdentifier(InputError):
    def __init__(self, name, offset):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at byte {offset}")


class UnboundVariable(InputError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"variable {name!r} is not bound")


class DomainError(NumericalError):
    """Evaluation left the real domain (log of non-positive, division by zero, ...)."""


class VariableScopeError(InputError):
    def __init__(self, field, variable):
        self.field = field
        self.variable = variable
        super().__init__(f"field {field!r} may not depend on variable {variable!r}")


class BoundsError(InputError):
    pass


class ProblemFileError(InputError):
    pass


class QuadratureError(NumericalError):
    pass


class DepthExceeded(QuadratureError):
    """Adaptive refinement gave up before the local error test passed.

    ``estimate`` holds the best value obtained anyway; ``level`` is the
    nesting level (0 = outermost) where refinement failed.
    """

    def __init__(self, estimate, level=0, failures=1):
        self.estimate = estimate
        self.level = level
        self.failures = failures
        super().__init__(
            f"quadrature refinement limit reached at nesting level {level} "
            f"({failures} subinterval(s)); best estimate {estimate!r}"
        )


class NonFiniteSample(QuadratureError):
    def __init__(self, level=0):
        self.level = level
        super().__init__(f"integrand produced a non-finite value at nesting level {level}")


class NonFiniteState(NumericalError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"Euler step produced a non-finite state at node {index}")


class OrderOutOfRange(InputError):
    pass


class NonIntegerStepCount(InputError):
    def __init__(self, h, span):
        self.h = h
        super().__init__(f"step size {h!r} does not divide the interval length {span!r} into an integer count")


class NonPositiveTolerance(InputError):
    pass


class RoundoffFloor(NumericalError):
    """M4 - M5 is below the arithmetic noise level; the a4 estimate is meaningless.

    Carries the (noise-dominated) estimate and the pilot M4 values so callers
    can fall back to them.
    """

    def __init__(self, estimate, pilot):
        self.estimate = estimate
        self.pilot = pilot
        super().__init__("M4 - M5 difference is at the roundoff floor; enlarge the pilot step")
