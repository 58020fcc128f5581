"""
Teoría de decisión cuántica bayesiana.

Maquinaria general para M hipótesis (operadores de riesgo, coste esperado,
condiciones de optimalidad) y la especialización binaria: medida óptima
proyectiva, coste por autovalores y las formas cerradas para estados puros.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from constants.tolerances import (
    CLAMP_TOL,
    MAX_PARTICLES,
    OPTIMALITY_TOL,
    POM_COMPLETENESS_TOL,
    POM_HERMITICITY_TOL,
    POM_PSD_TOL,
    PRIOR_SUM_TOL,
    ZERO_EIGENVALUE,
)
from core.exceptions import (
    DegeneratePriorError,
    DimensionMismatchError,
    InvalidCostMatrixError,
    InvalidPomError,
    InvalidPriorError,
    NonOptimalPomError,
    NumericalInconsistencyError,
)
from core.numkernel import (
    ComplexMatrix,
    as_matrix,
    hermitian_eigen,
    hermiticity_error,
)
from core.states import (
    DensityOperator,
    HalfAngle,
    PolarisationAngle,
    canonical_angle,
    ensemble_density,
    half_angle,
    overlap_delta_squared,
    symmetric_angles,
)

logger = logging.getLogger(__name__)


def _matrix_of(state) -> ComplexMatrix:
    if isinstance(state, DensityOperator):
        return state.matrix
    return np.asarray(state, dtype=np.complex128)


def _clamp(value: float, low: float, high: float, tol: float = CLAMP_TOL) -> float:
    if low - tol <= value < low:
        return low
    if high < value <= high + tol:
        return high
    return value


@dataclass(frozen=True)
class CostMatrix:
    """
    Matriz de costes: ``c[i][j]`` es el coste de elegir Hᵢ cuando Hⱼ es cierta.
    """

    c: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(float(x) for x in row) for row in self.c)
        size = len(rows)
        if size == 0 or any(len(row) != size for row in rows):
            raise InvalidCostMatrixError("La matriz de costes debe ser cuadrada")
        if not all(math.isfinite(x) for row in rows for x in row):
            raise InvalidCostMatrixError("La matriz de costes contiene valores no finitos")
        object.__setattr__(self, "c", rows)

    @classmethod
    def zero_one(cls, size: int = 2) -> "CostMatrix":
        """Costes 0-1: C_ij = 1 - δ_ij."""
        return cls(tuple(tuple(0.0 if i == j else 1.0 for j in range(size)) for i in range(size)))

    @property
    def size(self) -> int:
        return len(self.c)

    def is_zero_one(self) -> bool:
        return self == CostMatrix.zero_one(self.size)

    def check_binary(self) -> None:
        """
        Verifica c₁₂ > c₂₂ y c₂₁ > c₁₁, necesario para que γ sea positivo.
        """
        if self.size != 2:
            raise InvalidCostMatrixError(f"Se esperaba una matriz 2x2, tamaño {self.size}")
        (c11, c12), (c21, c22) = self.c
        if not (c12 > c22 and c21 > c11):
            raise InvalidCostMatrixError(
                "Se requiere c12 > c22 y c21 > c11 para el caso binario"
            )


@dataclass(frozen=True)
class Hypothesis:
    label: str
    state: DensityOperator
    prior: float


@dataclass(frozen=True)
class Pom:
    """
    Medida de operadores de probabilidad: un elemento por hipótesis.

    Se valida al construirla: cada elemento es hermítico y semidefinido
    positivo y la suma es la identidad.
    """

    elements: Tuple[ComplexMatrix, ...]
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        elements = tuple(as_matrix(e) for e in self.elements)
        object.__setattr__(self, "elements", elements)
        if self.check:
            self.validate()

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self):
        return len(self.elements)

    def validate(
        self,
        hermiticity_tol: float = POM_HERMITICITY_TOL,
        psd_tol: float = POM_PSD_TOL,
        completeness_tol: float = POM_COMPLETENESS_TOL,
    ) -> None:
        if not self.elements:
            raise InvalidPomError("La medida no tiene elementos")
        dim = self.elements[0].shape[0]
        total = np.zeros((dim, dim), dtype=np.complex128)
        for k, element in enumerate(self.elements):
            if element.shape != (dim, dim):
                raise InvalidPomError(f"Elemento {k} con forma {element.shape}")
            asym = hermiticity_error(element)
            if asym > hermiticity_tol:
                raise InvalidPomError(f"Elemento {k} no hermítico ({asym:.3e})")
            smallest = hermitian_eigen(element).eigenvalues[0]
            if smallest < -psd_tol:
                raise InvalidPomError(
                    f"Elemento {k} no semidefinido positivo ({smallest:.3e})"
                )
            total = total + element
        gap = float(np.max(np.abs(total - np.eye(dim))))
        if gap > completeness_tol:
            raise InvalidPomError(f"Los elementos no suman la identidad ({gap:.3e})")


@dataclass(frozen=True)
class OptimalityReport:
    upsilon_asymmetry: float
    min_eigenvalue_excess: Tuple[float, ...]
    is_optimal: bool
    tol: float = OPTIMALITY_TOL


@dataclass(frozen=True)
class BinaryProblem:
    """
    Problema de decisión binaria entre las polarizaciones θ₁ y θ₂.

    ``prior_xi`` es la probabilidad a priori de la hipótesis 1.
    """

    theta1: PolarisationAngle
    theta2: PolarisationAngle
    prior_xi: float
    n_particles: int = 1
    costs: CostMatrix = field(default_factory=CostMatrix.zero_one)

    def __post_init__(self):
        if not 0.0 <= self.prior_xi <= 1.0:
            raise InvalidPriorError(f"ξ fuera de [0, 1]: {self.prior_xi}")
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise InvalidPriorError(f"N debe ser >= 1: {self.n_particles}")
        object.__setattr__(self, "theta1", canonical_angle(self.theta1))
        object.__setattr__(self, "theta2", canonical_angle(self.theta2))

    @classmethod
    def from_delta(cls, prior_xi: float, delta: HalfAngle, n_particles: int = 1, **kwargs):
        """Construye el problema con θ₁ = δ y θ₂ = -δ."""
        theta1, theta2 = symmetric_angles(delta)
        return cls(theta1, theta2, prior_xi, n_particles, **kwargs)

    @property
    def delta(self) -> HalfAngle:
        return half_angle(self.theta1, self.theta2)

    @property
    def priors(self) -> Tuple[float, float]:
        return self.prior_xi, 1.0 - self.prior_xi

    def states(self, max_particles: int = MAX_PARTICLES) -> Tuple[DensityOperator, DensityOperator]:
        return (
            ensemble_density(self.theta1, self.n_particles, max_particles),
            ensemble_density(self.theta2, self.n_particles, max_particles),
        )

    def hypotheses(self, max_particles: int = MAX_PARTICLES) -> Tuple[Hypothesis, Hypothesis]:
        rho1, rho2 = self.states(max_particles)
        return (
            Hypothesis("H1", rho1, self.prior_xi),
            Hypothesis("H2", rho2, 1.0 - self.prior_xi),
        )


def outcome_probability(state, pom: Pom, j: int) -> float:
    """
    Probabilidad de elegir la hipótesis j, Tr(ρ Πⱼ).

    Args:
        state: DensityOperator o matriz
        pom (Pom): Medida aplicada
        j (int): Índice del elemento

    Returns:
        float: Probabilidad en [0, 1]; los desvíos de hasta CLAMP_TOL se recortan

    Raises:
        NumericalInconsistencyError: Si Tr(ρ Πⱼ) cae fuera de [0, 1] más allá de la tolerancia
    """
    rho = _matrix_of(state)
    element = pom.elements[j]
    if rho.shape != element.shape:
        raise DimensionMismatchError(
            f"Dimensiones incompatibles: ρ {rho.shape}, Π {element.shape}"
        )
    value = _clamp(float(np.real(np.sum(rho * element.T))), 0.0, 1.0)
    if not 0.0 <= value <= 1.0:
        raise NumericalInconsistencyError(f"Tr(ρ Π{j}) = {value!r} fuera de [0, 1]")
    return value


def _check_hypotheses(hypotheses: Sequence[Hypothesis], costs: CostMatrix, tol: float) -> int:
    if len(hypotheses) != costs.size:
        raise DimensionMismatchError(
            f"{len(hypotheses)} hipótesis para una matriz de costes de tamaño {costs.size}"
        )
    priors = [h.prior for h in hypotheses]
    if any(p < 0.0 or p > 1.0 for p in priors) or abs(sum(priors) - 1.0) > tol:
        raise InvalidPriorError(f"Probabilidades a priori inválidas: {priors}")
    dims = {_matrix_of(h.state).shape for h in hypotheses}
    if len(dims) != 1:
        raise DimensionMismatchError(f"Estados de dimensiones distintas: {dims}")
    return dims.pop()[0]


def risk_operators(
    hypotheses: Sequence[Hypothesis], costs: CostMatrix, prior_tol: float = PRIOR_SUM_TOL
) -> Tuple[ComplexMatrix, ...]:
    """
    Operadores de riesgo Rᵢ = Σⱼ ξⱼ·c[i][j]·ρⱼ.

    Returns:
        tuple: Un operador hermítico por hipótesis
    """
    dim = _check_hypotheses(hypotheses, costs, prior_tol)
    risks = []
    for i in range(costs.size):
        r = np.zeros((dim, dim), dtype=np.complex128)
        for j, hyp in enumerate(hypotheses):
            r = r + hyp.prior * costs.c[i][j] * _matrix_of(hyp.state)
        r.setflags(write=False)
        risks.append(r)
    return tuple(risks)


def expected_cost(hypotheses: Sequence[Hypothesis], costs: CostMatrix, pom: Pom) -> float:
    """
    Coste esperado de la estrategia, Σᵢ Tr(Rᵢ Πᵢ).
    """
    risks = risk_operators(hypotheses, costs)
    if len(pom) != len(risks):
        raise InvalidPomError(f"La medida tiene {len(pom)} elementos, se esperaban {len(risks)}")
    return float(sum(np.real(np.trace(r @ p)) for r, p in zip(risks, pom.elements)))


def _upsilon(risks, pom: Pom) -> ComplexMatrix:
    if len(pom) != len(risks):
        raise InvalidPomError(f"La medida tiene {len(pom)} elementos, se esperaban {len(risks)}")
    return sum(np.asarray(r) @ p for r, p in zip(risks, pom.elements))


def check_optimality(risks, pom: Pom, tol: float = OPTIMALITY_TOL) -> OptimalityReport:
    """
    Condiciones necesarias y suficientes de optimalidad de una medida.

    Υ = Σⱼ RⱼΠⱼ debe ser autoadjunto y cada Rⱼ - Υ semidefinido positivo.

    Args:
        risks: Operadores de riesgo
        pom (Pom): Medida candidata
        tol (float): Tolerancia del veredicto

    Returns:
        OptimalityReport: Hallazgos; nunca lanza por no ser óptima
    """
    upsilon = _upsilon(risks, pom)
    asymmetry = hermiticity_error(upsilon)
    sym = (upsilon + upsilon.conj().T) / 2.0
    excesses = []
    for r in risks:
        smallest = float(hermitian_eigen(np.asarray(r) - sym).eigenvalues[0])
        if -CLAMP_TOL <= smallest < 0.0:
            smallest = 0.0
        excesses.append(smallest)
    is_optimal = asymmetry <= tol and all(e >= -tol for e in excesses)
    return OptimalityReport(asymmetry, tuple(excesses), is_optimal, tol)


def bayes_cost_from_upsilon(risks, pom: Pom, tol: float = OPTIMALITY_TOL) -> float:
    """
    Coste de Bayes como Tr Υ para una medida óptima.

    Raises:
        NonOptimalPomError: Si la medida no supera ``check_optimality``;
            para medidas arbitrarias debe usarse ``expected_cost``
    """
    report = check_optimality(risks, pom, tol)
    if not report.is_optimal:
        raise NonOptimalPomError(
            "La medida no es óptima (Tr Υ no es el coste); use expected_cost. "
            f"Asimetría {report.upsilon_asymmetry:.3e}, excesos {report.min_eigenvalue_excess}"
        )
    return float(np.real(np.trace(_upsilon(risks, pom))))


def gamma(prior_xi: float, costs: CostMatrix = None) -> float:
    """
    Cociente γ = ξ₁(C₂₁ - C₁₁) / ξ₂(C₁₂ - C₂₂); con costes 0-1, ξ/(1-ξ).

    Raises:
        DegeneratePriorError: Si ξ ∈ {0, 1}
        InvalidCostMatrixError: Si algún denominador no es positivo
    """
    costs = costs or CostMatrix.zero_one()
    costs.check_binary()
    if not 0.0 < prior_xi < 1.0:
        raise DegeneratePriorError(f"γ no está definido para ξ = {prior_xi}")
    (c11, c12), (c21, c22) = costs.c
    return prior_xi * (c21 - c11) / ((1.0 - prior_xi) * (c12 - c22))


def prior_only_cost(priors: Sequence[float], costs: CostMatrix = None) -> float:
    """
    Coste de decidir sólo con el prior, sin medir: minᵢ Σⱼ ξⱼ cᵢⱼ.

    Args:
        priors: ξ₁..ξ_M, o un único ξ para el caso binario
    """
    if isinstance(priors, (int, float)):
        priors = (float(priors), 1.0 - float(priors))
    costs = costs or CostMatrix.zero_one(len(priors))
    return min(sum(p * c for p, c in zip(priors, row)) for row in costs.c)


def binary_optimal_pom(
    rho1, rho2, prior_xi: float, costs: CostMatrix = None, zero_eigenvalue: float = ZERO_EIGENVALUE
) -> Pom:
    """
    Medida óptima binaria, proyectiva.

    Π₂ proyecta sobre el subespacio de autovalores estrictamente positivos de
    ρ₂ - γρ₁; Π₁ = I - Π₂. Los autovalores con |η| <= ``zero_eigenvalue`` van a Π₁.

    Args:
        rho1, rho2: Estados de las hipótesis 1 y 2
        prior_xi (float): ξ en (0, 1)
        costs (CostMatrix): Costes, 0-1 por defecto
        zero_eigenvalue (float): Umbral de autovalor nulo

    Returns:
        Pom: (Π₁, Π₂)
    """
    m1, m2 = _matrix_of(rho1), _matrix_of(rho2)
    if m1.shape != m2.shape:
        raise DimensionMismatchError(f"Estados de dimensiones distintas: {m1.shape}, {m2.shape}")
    g = gamma(prior_xi, costs)
    spectrum = hermitian_eigen(m2 - g * m1)
    pi2 = spectrum.projector(spectrum.eigenvalues > zero_eigenvalue)
    pi1 = np.eye(m1.shape[0]) - pi2
    return Pom((pi1, pi2), check=False)


def binary_problem_spectrum(problem: BinaryProblem, max_particles: int = MAX_PARTICLES):
    """Espectro de ρ₂ - γρ₁ para el problema dado."""
    rho1, rho2 = problem.states(max_particles)
    g = gamma(problem.prior_xi, problem.costs)
    return hermitian_eigen(rho2.matrix - g * rho1.matrix)


def binary_bayes_cost_eigen(
    problem: BinaryProblem,
    zero_eigenvalue: float = ZERO_EIGENVALUE,
    max_particles: int = MAX_PARTICLES,
) -> float:
    """
    Coste de Bayes binario por diagonalización de ρ₂ - γρ₁.

    C* = ξ₁C₁₁ + ξ₂C₁₂ - ξ₂(C₁₂ - C₂₂)·Σ_{η>0} η. Con prior degenerado se
    decide sin medir.

    Args:
        problem (BinaryProblem): Problema completo
        zero_eigenvalue (float): Umbral para considerar un autovalor positivo
        max_particles (int): Límite de la representación densa

    Returns:
        float: Coste de Bayes mínimo
    """
    xi1, xi2 = problem.priors
    costs = problem.costs
    if not 0.0 < problem.prior_xi < 1.0:
        return prior_only_cost((xi1, xi2), costs)
    eta = binary_problem_spectrum(problem, max_particles).eigenvalues
    positive = float(np.sum(eta[eta > zero_eigenvalue]))
    (c11, c12), (c21, c22) = costs.c
    return xi1 * c11 + xi2 * c12 - xi2 * (c12 - c22) * positive


def rank2_eigenvalues(gamma_value: float, delta_sq: float) -> Tuple[float, float]:
    """
    Los dos autovalores no nulos de ρ₂ - γρ₁ para estados puros:
    λ± = ½{(1-γ) ± √((1-γ)² - 4γ(Δ²-1))}.

    Returns:
        tuple: (λ₊, λ₋) con λ₊ >= λ₋
    """
    b = 1.0 - gamma_value
    product = gamma_value * (delta_sq - 1.0)
    root = math.sqrt(max(b * b - 4.0 * product, 0.0))
    # La raíz grande se calcula directamente y la otra por el producto
    if b >= 0.0:
        plus = 0.5 * (b + root)
        minus = product / plus if plus != 0.0 else 0.5 * (b - root)
    else:
        minus = 0.5 * (b - root)
        plus = product / minus
    return plus, minus


def pure_state_bayes_cost(prior_xi: float, overlap_sq: float) -> float:
    """
    ½(1 - √(1 - 4ξ(1-ξ)Δ²)) evaluado sin cancelación como a / (2(1 + √(1-a))).
    """
    a = 4.0 * prior_xi * (1.0 - prior_xi) * overlap_sq
    a = min(max(a, 0.0), 1.0)
    return a / (2.0 * (1.0 + math.sqrt(1.0 - a)))


def combined_cost_closed(prior_xi: float, delta: HalfAngle, n_particles: int) -> float:
    """
    Coste de Bayes de la medición combinada de las N partículas (costes 0-1).
    """
    return pure_state_bayes_cost(prior_xi, overlap_delta_squared(delta, n_particles))
