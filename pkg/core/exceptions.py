"""
Excepciones propias de qdecide.
"""


class QDecideError(Exception):
    """Error base de la biblioteca."""


class NonHermitianError(QDecideError, ValueError):
    """La matriz no es hermítica dentro de la tolerancia."""

    def __init__(self, asymmetry, tol):
        self.asymmetry = asymmetry
        self.tol = tol
        super().__init__(
            f"Matriz no hermítica: max|m - m†| = {asymmetry:.3e} > {tol:.1e}"
        )


class ConvergenceError(QDecideError, ArithmeticError):
    """El método de Jacobi no convergió dentro del límite de barridos."""

    def __init__(self, residual, sweeps):
        self.residual = residual
        self.sweeps = sweeps
        super().__init__(
            f"Jacobi no convergió tras {sweeps} barridos (residuo {residual:.3e})"
        )


class DimensionMismatchError(QDecideError, ValueError):
    pass


class CapExceededError(QDecideError, ValueError):
    """Un tamaño supera el límite configurado."""

    def __init__(self, what, value, cap):
        self.value = value
        self.cap = cap
        super().__init__(f"{what} = {value} supera el límite {cap}")


class InvalidPriorError(QDecideError, ValueError):
    pass


class DegeneratePriorError(InvalidPriorError):
    """ξ ∈ {0, 1}: la decisión se toma sin medir."""


class InvalidCostMatrixError(QDecideError, ValueError):
    pass


class InvalidPomError(QDecideError, ValueError):
    pass


class NonOptimalPomError(QDecideError):
    pass


class ImpossibleOutcomeError(QDecideError, ZeroDivisionError):
    def __init__(self, outcome):
        self.outcome = outcome
        super().__init__(
            f"El resultado {outcome:+d} es imposible bajo ambas hipótesis"
        )


class DegenerateAngleError(QDecideError, ValueError):
    pass


class InvalidPartitionError(QDecideError, ValueError):
    pass


class NumericalInconsistencyError(QDecideError, ArithmeticError):
    pass
