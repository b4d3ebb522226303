class NoetherqError(Exception):
    """
    Base class for every error raised by noetherq.

    Subclasses also derive from the closest builtin exception so callers that only
    know about ``ValueError`` or ``ZeroDivisionError`` keep working.
    """


# --------------------------------------------------------------------------- #
# Expressions
# --------------------------------------------------------------------------- #
class ExprSyntaxError(NoetherqError, ValueError):
    def __init__(self, message: str, offset: int, source: str = ""):
        self.offset = offset
        self.source = source
        super().__init__(f"{message} (at offset {offset})")


class UnknownFunctionError(ExprSyntaxError):
    def __init__(self, name: str, offset: int, source: str = ""):
        self.name = name
        super().__init__(f"unknown function {name!r}", offset, source)


class InvalidExpressionError(NoetherqError, ValueError):
    pass


class MissingBindingError(NoetherqError, LookupError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no value bound for variable {name!r}")


class EvaluationDivisionError(NoetherqError, ZeroDivisionError):
    pass


class EvaluationDomainError(NoetherqError, ArithmeticError):
    pass


# --------------------------------------------------------------------------- #
# Mechanics
# --------------------------------------------------------------------------- #
class ModelError(NoetherqError, ValueError):
    pass


class UnboundVariableError(ModelError):
    def __init__(self, names):
        self.names = tuple(sorted(names))
        super().__init__(f"unbound variable(s): {', '.join(self.names)}")


class NonQuadraticError(NoetherqError, ValueError):
    pass


class SingularHessianError(NoetherqError, ValueError):
    pass


class InvalidGeneratorError(NoetherqError, ValueError):
    pass


class IntegrationError(NoetherqError, ArithmeticError):
    pass


class DegenerateInputError(NoetherqError, ValueError):
    pass


class ConvergenceError(NoetherqError, ArithmeticError):
    pass


# --------------------------------------------------------------------------- #
# Quantum
# --------------------------------------------------------------------------- #
class UnsupportedOperatorError(NoetherqError, ValueError):
    pass


class OverdampedError(NoetherqError, ValueError):
    pass


class GridError(NoetherqError, ValueError):
    pass


class ZeroNormError(NoetherqError, ValueError):
    pass


class BandedSolveError(NoetherqError, ArithmeticError):
    pass
