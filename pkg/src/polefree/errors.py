"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the domain an operation is defined on."""


class DegenerateError(ValueError):
    """Input is degenerate (zero leading data, empty support, ...)."""


class PoleError(ArithmeticError):
    """A denominator vanished where a value was requested."""


class StepError(ValueError):
    """Simplex step size exceeds the admissible maximum."""


class DivergenceError(ArithmeticError):
    """An iterative reweighting produced an unusable denominator."""


class EvaluationError(ArithmeticError):
    """A special-function factor underflowed or was not finite."""
