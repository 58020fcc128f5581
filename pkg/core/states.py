"""
Estados cuánticos del problema: operadores densidad de un qubit polarizado
en el plano x-y, operador densidad de espín N/2 en la representación simétrica
de dimensión N+1, y los vectores de amplitud u, v.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from constants.tolerances import (
    HERMITICITY_TOL,
    MAX_PARTICLES,
    PURITY_TOL,
    TRACE_TOL,
)
from core.exceptions import (
    CapExceededError,
    NumericalInconsistencyError,
    QDecideError,
)
from core.numkernel import (
    ComplexMatrix,
    hermitian_eigen,
    hermiticity_error,
    outer_product,
    trace,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# Ángulos en radianes
PolarisationAngle = float
HalfAngle = float


def canonical_angle(theta: float) -> PolarisationAngle:
    """Lleva un ángulo al intervalo [0, 2π)."""
    value = math.fmod(theta, TWO_PI)
    if value < 0.0:
        value += TWO_PI
    # fmod puede devolver 2π por redondeo tras sumar
    return 0.0 if value >= TWO_PI else value


def wrap_angle(theta: float) -> float:
    """Lleva un ángulo al intervalo (-π, π]."""
    value = canonical_angle(theta)
    return value - TWO_PI if value > math.pi else value


def half_angle(theta1: float, theta2: float) -> HalfAngle:
    """
    Semiángulo δ entre dos direcciones de polarización, |θ₂ - θ₁| = 2δ.

    Returns:
        float: δ en [0, π/2]
    """
    return abs(wrap_angle(theta2 - theta1)) / 2.0


def symmetric_angles(delta: float):
    """Par (θ₁, θ₂) = (δ, -δ) canonicalizado, usado cuando sólo se da δ."""
    return canonical_angle(delta), canonical_angle(-delta)


def _check_particles(n_particles: int, max_particles: int) -> int:
    n = int(n_particles)
    if n != n_particles or n < 1:
        raise QDecideError(f"El número de partículas debe ser un entero >= 1: {n_particles}")
    if n > max_particles:
        raise CapExceededError("N", n, max_particles)
    return n


def log_binomial_weights(n_particles: int) -> np.ndarray:
    """
    Logaritmo de 2^{-N/2}·√C(N, n) para n = 0..N.

    Se evalúa con log-gamma para que no haya desbordamiento con N grande.
    """
    n = np.arange(n_particles + 1, dtype=np.float64)
    log_binom = gammaln(n_particles + 1.0) - gammaln(n + 1.0) - gammaln(n_particles - n + 1.0)
    return 0.5 * log_binom - 0.5 * n_particles * math.log(2.0)


@dataclass(frozen=True)
class AmplitudeVector:
    """Vector u con u_n = 2^{-N/2}·√C(N,n)·e^{inθ}."""

    entries: np.ndarray
    theta: PolarisationAngle

    @property
    def particle_count(self) -> int:
        return self.entries.size - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))


@dataclass(frozen=True)
class DensityOperator:
    """
    Operador densidad de espín N/2 en la base simétrica de dimensión N+1.
    """

    matrix: ComplexMatrix
    particle_count: int
    theta: PolarisationAngle = 0.0

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity_error(self) -> float:
        rho = self.matrix
        return float(np.max(np.abs(rho @ rho - rho)))

    def verify(
        self,
        hermiticity_tol: float = HERMITICITY_TOL,
        trace_tol: float = TRACE_TOL,
        purity_tol: float = PURITY_TOL,
    ) -> None:
        """
        Comprueba que el operador es hermítico, de traza 1, semidefinido
        positivo y puro.

        Raises:
            NumericalInconsistencyError: Si alguna propiedad falla
        """
        asym = hermiticity_error(self.matrix)
        if asym > hermiticity_tol:
            raise NumericalInconsistencyError(f"ρ no hermítico: {asym:.3e}")
        tr = trace(self.matrix)
        if abs(tr - 1.0) > trace_tol:
            raise NumericalInconsistencyError(f"Traza de ρ = {tr}")
        smallest = hermitian_eigen(self.matrix).eigenvalues[0]
        if smallest < -hermiticity_tol:
            raise NumericalInconsistencyError(f"ρ no es semidefinido positivo: {smallest:.3e}")
        purity = self.purity_error()
        if purity > purity_tol:
            raise NumericalInconsistencyError(f"ρ no es puro: ||ρ²-ρ|| = {purity:.3e}")


def amplitude_vector(
    theta: PolarisationAngle, n_particles: int, max_particles: int = MAX_PARTICLES
) -> AmplitudeVector:
    """
    Vector de amplitudes del estado polarizado a ángulo θ.

    Args:
        theta (float): Ángulo de polarización
        n_particles (int): Número de partículas N >= 1
        max_particles (int): Límite de la representación densa

    Returns:
        AmplitudeVector: Vector de norma 1 con N+1 componentes
    """
    n = _check_particles(n_particles, max_particles)
    theta = canonical_angle(theta)
    k = np.arange(n + 1)
    entries = np.exp(log_binomial_weights(n)) * np.exp(1j * k * theta)
    entries.setflags(write=False)
    return AmplitudeVector(entries, theta)


def ensemble_density(
    theta: PolarisationAngle, n_particles: int, max_particles: int = MAX_PARTICLES
) -> DensityOperator:
    """
    Operador densidad de N partículas tratado como un único espín N/2.

    La entrada (m, n) vale 2^{-N}·√(C(N,m)·C(N,n))·e^{-i(m-n)θ}; el módulo se
    calcula en dominio logarítmico entrada a entrada.

    Args:
        theta (float): Ángulo de polarización
        n_particles (int): Número de partículas N >= 1
        max_particles (int): Límite de la representación densa

    Returns:
        DensityOperator: Matriz (N+1)x(N+1)

    Raises:
        CapExceededError: Si N supera ``max_particles``
    """
    n = _check_particles(n_particles, max_particles)
    theta = canonical_angle(theta)
    w = log_binomial_weights(n)
    k = np.arange(n + 1)
    magnitude = np.exp(w[:, None] + w[None, :])
    phase = np.exp(-1j * (k[:, None] - k[None, :]) * theta)
    matrix = magnitude * phase
    matrix.setflags(write=False)
    return DensityOperator(matrix, n, theta)


def qubit_density(theta: PolarisationAngle) -> DensityOperator:
    """Operador densidad de una sola partícula (N = 1)."""
    return ensemble_density(theta, 1)


def spin_up_projector(phi: float) -> ComplexMatrix:
    """Proyector sobre el estado de espín arriba a lo largo de φ."""
    return qubit_density(phi).matrix


def overlap_delta_squared_binomial(delta: HalfAngle, n_particles: int) -> float:
    """
    Δ² evaluado por la suma binomial |2^{-N}·Σ_m C(N,m)·e^{2imδ}|².
    """
    n = int(n_particles)
    m = np.arange(n + 1)
    log_binom = gammaln(n + 1.0) - gammaln(m + 1.0) - gammaln(n - m + 1.0)
    terms = np.exp(log_binom - n * math.log(2.0)) * np.exp(2j * m * delta)
    return float(abs(np.sum(terms)) ** 2)


def overlap_delta_squared(
    delta: HalfAngle, n_particles: int, verify: bool = False, tol: float = 1e-12
) -> float:
    """
    Solapamiento al cuadrado de los estados de N partículas, cos^{2N}(δ).

    Args:
        delta (float): Semiángulo δ
        n_particles (int): Número de partículas
        verify (bool): Si True, contrasta con la suma binomial
        tol (float): Tolerancia del contraste

    Returns:
        float: Δ² en [0, 1]

    Raises:
        NumericalInconsistencyError: Si ``verify`` y ambas rutas discrepan
    """
    value = math.cos(delta) ** (2 * int(n_particles))
    if verify:
        other = overlap_delta_squared_binomial(delta, n_particles)
        if abs(other - value) > tol:
            raise NumericalInconsistencyError(
                f"Δ²: cos^2N = {value!r}, suma binomial = {other!r}"
            )
    return value


def state_overlap_squared(u: AmplitudeVector, v: AmplitudeVector) -> float:
    """|u·v*|² entre dos vectores de amplitud."""
    return float(abs(np.vdot(v.entries, u.entries)) ** 2)


def density_from_amplitudes(u: AmplitudeVector) -> DensityOperator:
    """ρ = u* uᵀ, la identidad (ρ)_{mn} = u*_m u_n."""
    return DensityOperator(outer_product(u.entries, u.entries), u.particle_count, u.theta)
