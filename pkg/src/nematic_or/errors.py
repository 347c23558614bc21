"""Exception hierarchy shared by the solver modules."""


class NematicError(Exception):
    """Base class for every error raised by this package."""


class GridSizeError(NematicError, ValueError):
    pass


class DomainError(NematicError, ValueError):
    pass


class ParameterError(NematicError, ValueError):
    pass


class RegimeError(NematicError, ValueError):
    """A residual or solver was called with parameters for another regime."""


class SingularityError(NematicError, ValueError):
    pass


class DivergenceError(NematicError, FloatingPointError):
    pass


class FactorizationError(NematicError, ArithmeticError):
    pass


class StagnationError(NematicError, RuntimeError):
    pass


class IterationError(NematicError, RuntimeError):
    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class NumericalError(NematicError, ArithmeticError):
    pass


class ConfigError(NematicError, ValueError):
    pass
