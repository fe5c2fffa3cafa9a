"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the domain of a function."""


class UnsupportedOrderError(ValueError):
    """Meijer-G order class outside the supported set."""


class AccuracyError(ArithmeticError):
    """A numerical routine could not reach its tolerance.

    ``estimate`` carries the achieved (relative) error estimate.
    """

    def __init__(self, message, estimate=float("nan"), value=float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.value = value


class QuadratureError(AccuracyError):
    """Adaptive quadrature failed to converge within its budget."""


class UnsupportedCaseError(ValueError):
    """A closed form was requested outside its range of validity."""
