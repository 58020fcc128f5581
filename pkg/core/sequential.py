"""
Medición secuencial adaptativa, árbol de posteriores y estrategias por grupos.

Cada partícula se mide con el detector orientado según el ángulo óptimo para
la probabilidad a posteriori vigente. El árbol completo de 2^N resultados se
enumera por niveles con arreglos de numpy; las estrategias por grupos miden
cada subconjunto como un espín g/2 con la medida óptima binaria.
"""

import hashlib
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, List, NamedTuple, Sequence, Tuple

import numpy as np
from scipy.stats import binom

from constants.tolerances import DEGENERATE_ANGLE, MAX_TREE_PARTICLES
from core.decision import (
    BinaryProblem,
    binary_bayes_cost_eigen,
    binary_optimal_pom,
    outcome_probability,
    pure_state_bayes_cost,
)
from core.exceptions import (
    CapExceededError,
    DegenerateAngleError,
    ImpossibleOutcomeError,
    InvalidPartitionError,
    QDecideError,
)
from core.states import (
    HalfAngle,
    PolarisationAngle,
    canonical_angle,
    ensemble_density,
    overlap_delta_squared,
)

logger = logging.getLogger(__name__)

UP = 1
DOWN = -1


@dataclass(frozen=True)
class Partition:
    """
    Secuencia ordenada de tamaños de subconjunto que suman N.

    ``[1, 1, ..., 1]`` es la medición secuencial y ``[N]`` la combinada.
    """

    groups: Tuple[int, ...]

    def __post_init__(self):
        groups = tuple(self.groups)
        if not groups:
            raise InvalidPartitionError("La partición está vacía")
        for g in groups:
            if int(g) != g or g < 1:
                raise InvalidPartitionError(f"Tamaño de grupo inválido: {g!r}")
        object.__setattr__(self, "groups", tuple(int(g) for g in groups))

    @classmethod
    def sequential(cls, n_particles: int) -> "Partition":
        return cls((1,) * int(n_particles))

    @classmethod
    def combined(cls, n_particles: int) -> "Partition":
        return cls((int(n_particles),))

    @classmethod
    def parse(cls, text: str, n_particles: int = None) -> "Partition":
        """
        Interpreta ``"2,1"``, ``"2+1"``, ``"[2,1]"``, ``"sequential"`` o
        ``"combined"`` (las dos últimas necesitan ``n_particles``).
        """
        cleaned = text.strip().strip("[]").replace("+", ",")
        if cleaned in ("sequential", "combined"):
            if n_particles is None:
                raise InvalidPartitionError(f"'{cleaned}' necesita N")
            return getattr(cls, cleaned)(n_particles)
        try:
            groups = tuple(int(part) for part in cleaned.split(",") if part.strip())
        except ValueError:
            raise InvalidPartitionError(f"Partición ilegible: {text!r}") from None
        partition = cls(groups)
        if n_particles is not None and partition.n_particles != n_particles:
            raise InvalidPartitionError(
                f"La partición {partition} suma {partition.n_particles}, no {n_particles}"
            )
        return partition

    @property
    def n_particles(self) -> int:
        return sum(self.groups)

    @property
    def is_sequential(self) -> bool:
        return all(g == 1 for g in self.groups)

    @property
    def is_combined(self) -> bool:
        return len(self.groups) == 1

    def __str__(self):
        return "+".join(str(g) for g in self.groups)


def compositions(n: int) -> Iterator[Partition]:
    """
    Todas las composiciones ordenadas de n (2^{n-1}), en orden lexicográfico.
    """
    if n < 1:
        raise InvalidPartitionError(f"n debe ser >= 1: {n}")

    def _walk(remaining):
        if remaining == 0:
            yield ()
            return
        for first in range(1, remaining + 1):
            for rest in _walk(remaining - first):
                yield (first,) + rest

    for groups in _walk(n):
        yield Partition(groups)


def bias(theta_k, phi):
    """
    Probabilidad de espín arriba con el detector a ángulo φ, cos²((θₖ-φ)/2).

    Acepta escalares o arreglos de numpy.
    """
    if np.ndim(theta_k) == 0 and np.ndim(phi) == 0:
        return math.cos((theta_k - phi) / 2.0) ** 2
    return np.cos((np.asarray(theta_k) - np.asarray(phi)) / 2.0) ** 2


def bias_down(theta_k, phi):
    """
    Probabilidad de espín abajo, sin²((θₖ-φ)/2).

    Se evalúa directamente y no como 1 - ``bias``: cuando cos² redondea a 1
    el resultado sigue siendo positivo.
    """
    if np.ndim(theta_k) == 0 and np.ndim(phi) == 0:
        return math.sin((theta_k - phi) / 2.0) ** 2
    return np.sin((np.asarray(theta_k) - np.asarray(phi)) / 2.0) ** 2


def optimal_angle(
    prior_xi: float,
    theta1: PolarisationAngle,
    theta2: PolarisationAngle,
    degenerate: float = DEGENERATE_ANGLE,
) -> float:
    """
    Orientación óptima del detector para la probabilidad a priori ξ.

    Se usa el arcotangente de dos argumentos de
    (ξ sinθ₁ - (1-ξ) sinθ₂, ξ cosθ₁ - (1-ξ) cosθ₂), de modo que espín arriba
    corresponde siempre a decidir θ₁.

    Returns:
        float: φ en [0, 2π)

    Raises:
        DegenerateAngleError: Si ambas componentes se anulan (θ₁ ≡ θ₂, ξ = 1/2)
    """
    y = prior_xi * math.sin(theta1) - (1.0 - prior_xi) * math.sin(theta2)
    x = prior_xi * math.cos(theta1) - (1.0 - prior_xi) * math.cos(theta2)
    if abs(x) < degenerate and abs(y) < degenerate:
        raise DegenerateAngleError(
            f"Ángulo óptimo indefinido para ξ = {prior_xi}, θ₁ = {theta1}, θ₂ = {theta2}"
        )
    return canonical_angle(math.atan2(y, x))


def policy_angles(posteriors, theta1: PolarisationAngle, theta2: PolarisationAngle, degenerate: float = DEGENERATE_ANGLE):
    """
    Versión vectorial de ``optimal_angle``.

    Donde el ángulo no está definido los dos estados coinciden y cualquier
    orientación es igual de buena; se usa θ₁.
    """
    xi = np.asarray(posteriors, dtype=np.float64)
    y = xi * math.sin(theta1) - (1.0 - xi) * math.sin(theta2)
    x = xi * math.cos(theta1) - (1.0 - xi) * math.cos(theta2)
    phi = np.mod(np.arctan2(y, x), 2.0 * math.pi)
    flat = (np.abs(x) < degenerate) & (np.abs(y) < degenerate)
    return np.where(flat, theta1, phi)


def one_step_cost(prior_xi: float, theta1, theta2, phi):
    """
    Coste 0-1 esperado de medir una partícula a lo largo de φ y decidir
    con la regla de Bayes según el resultado.

    Para cada resultado se toma la hipótesis de menor coste ponderado.
    ``phi`` puede ser un arreglo.
    """
    up = np.minimum(prior_xi * bias(theta1, phi), (1.0 - prior_xi) * bias(theta2, phi))
    down = np.minimum(
        prior_xi * bias_down(theta1, phi), (1.0 - prior_xi) * bias_down(theta2, phi)
    )
    total = up + down
    return float(total) if np.ndim(total) == 0 else total


def posterior_update(
    prior_xi: float, b1: float, b2: float, outcome: int, d1: float = None, d2: float = None
) -> float:
    """
    Probabilidad a posteriori de θ₁ tras observar espín arriba (+1) o abajo (-1).

    Args:
        prior_xi (float): Probabilidad a priori de θ₁
        b1, b2 (float): Probabilidades de espín arriba bajo cada hipótesis
        d1, d2 (float): Probabilidades de espín abajo; por defecto 1 - b,
            conviene pasarlas con ``bias_down`` cuando b es casi 1
        outcome (int): +1 o -1

    Returns:
        float: Probabilidad a posteriori

    Raises:
        ImpossibleOutcomeError: Si el resultado es imposible bajo ambas hipótesis
    """
    if outcome == UP:
        l1, l2 = b1, b2
    elif outcome == DOWN:
        l1 = 1.0 - b1 if d1 is None else d1
        l2 = 1.0 - b2 if d2 is None else d2
    else:
        raise QDecideError(f"Resultado inválido: {outcome!r}")
    numerator = l1 * prior_xi
    denominator = numerator + l2 * (1.0 - prior_xi)
    if denominator <= 0.0:
        raise ImpossibleOutcomeError(outcome)
    return numerator / denominator


def closed_posterior(prior_xi: float, n: int, sign: int, delta: HalfAngle) -> float:
    """
    Probabilidad a posteriori tras n observaciones con orientación óptima.

    El árbol se recombina en dos valores por nivel:
    ½(1 ± √(1 - 4ξ(1-ξ)cos^{2n}δ)). Con n = 0 devuelve max/min(ξ, 1-ξ).
    """
    if sign not in (UP, DOWN):
        raise QDecideError(f"Signo inválido: {sign!r}")
    a = 4.0 * prior_xi * (1.0 - prior_xi) * math.cos(delta) ** (2 * int(n))
    root = math.sqrt(max(1.0 - a, 0.0))
    if sign == UP:
        return 0.5 * (1.0 + root)
    # 0.5 * (1 - root) sin cancelación
    return a / (2.0 * (1.0 + root))


def sequential_cost_closed(prior_xi: float, delta: HalfAngle, n_particles: int) -> float:
    """Coste de Bayes de la medición secuencial adaptativa de N partículas."""
    return pure_state_bayes_cost(prior_xi, overlap_delta_squared(delta, n_particles))


def legacy_single_particle_cost(prior_xi: float, delta: HalfAngle) -> float:
    """
    Expresión publicada para N = 1, ½(1 - √(2ξ² - (2 + cos2δ)ξ + 1)).

    No coincide con el coste de Bayes salvo en ξ = 1/2 y no se anula en ξ = 1.
    Se conserva sólo como referencia en las pruebas de regresión.
    """
    radicand = 2.0 * prior_xi ** 2 - (2.0 + math.cos(2.0 * delta)) * prior_xi + 1.0
    return 0.5 * (1.0 - math.sqrt(max(radicand, 0.0)))


@dataclass(frozen=True)
class PosteriorBranch:
    """
    Una hoja del árbol de posteriores.

    ``posteriors[d]`` es la probabilidad a posteriori tras d+1 observaciones;
    ``detector_angles[d]`` el ángulo usado en la observación d+1.
    """

    outcomes: Tuple[int, ...]
    weight: float
    posterior: float
    detector_angles: Tuple[float, ...]
    posteriors: Tuple[float, ...]

    @property
    def depth(self) -> int:
        return len(self.outcomes)

    @property
    def outcome_string(self) -> str:
        return "".join("+" if o == UP else "-" for o in self.outcomes)

    def angle_hash(self, digits: int = 12) -> str:
        """Huella corta de la secuencia de ángulos del detector."""
        text = ",".join(f"{phi:.15e}" for phi in self.detector_angles)
        return hashlib.sha256(text.encode("ascii")).hexdigest()[:digits]


class TreeEnumeration(NamedTuple):
    branches: List[PosteriorBranch]
    cost: float


def _check_tree_size(n_particles: int, max_particles: int) -> int:
    n = int(n_particles)
    if n != n_particles or n < 1:
        raise QDecideError(f"N debe ser un entero >= 1: {n_particles}")
    if n > max_particles:
        raise CapExceededError("N", n, max_particles)
    return n


def _bayes_update(post, l1, l2, fallback):
    numerator = post * l1
    denominator = numerator + (1.0 - post) * l2
    out = np.array(fallback, dtype=np.float64)
    np.divide(numerator, denominator, out=out, where=denominator > 0.0)
    return out


def _expand_level(post, mass1, mass2, theta1: float, theta2: float):
    """Un nivel del árbol: ángulos, posteriores y masas de los hijos (+, -) intercalados."""
    phi = policy_angles(post, theta1, theta2)
    b1, d1 = bias(theta1, phi), bias_down(theta1, phi)
    b2, d2 = bias(theta2, phi), bias_down(theta2, phi)
    new1 = np.column_stack((mass1 * b1, mass1 * d1)).ravel()
    new2 = np.column_stack((mass2 * b2, mass2 * d2)).ravel()
    total = new1 + new2
    # Caminos de peso nulo: se conserva la probabilidad del nodo padre
    ratio = np.repeat(post, 2)
    np.divide(new1, total, out=ratio, where=total > 0.0)
    up = _bayes_update(post, b1, b2, ratio[0::2])
    down = _bayes_update(post, d1, d2, ratio[1::2])
    return phi, np.column_stack((up, down)).ravel(), new1, new2


def tree_cost(
    prior_xi: float,
    theta1: PolarisationAngle,
    theta2: PolarisationAngle,
    n_particles: int,
    max_particles: int = MAX_TREE_PARTICLES,
) -> float:
    """
    Coste del árbol secuencial sin construir las hojas.

    Mismo recorrido que ``enumerate_tree`` pero sólo guarda las masas y las
    posteriores del último nivel.
    """
    n = _check_tree_size(n_particles, max_particles)
    theta1, theta2 = canonical_angle(theta1), canonical_angle(theta2)
    mass1 = np.array([prior_xi], dtype=np.float64)
    mass2 = np.array([1.0 - prior_xi], dtype=np.float64)
    post = np.array([prior_xi], dtype=np.float64)
    for _ in range(n):
        _, post, mass1, mass2 = _expand_level(post, mass1, mass2, theta1, theta2)
    return float(np.sum(np.minimum(mass1, mass2)))


def enumerate_tree(
    prior_xi: float,
    theta1: PolarisationAngle,
    theta2: PolarisationAngle,
    n_particles: int,
    max_particles: int = MAX_TREE_PARTICLES,
) -> TreeEnumeration:
    """
    Enumera los 2^N caminos de la medición secuencial adaptativa.

    En cada paso se recalcula el ángulo óptimo con la probabilidad a
    posteriori del camino, se actualiza con la regla de Bayes y se acumula el
    peso del camino como ξ·Πb₁ + (1-ξ)·Πb₂. Las hojas van en orden
    lexicográfico con '+' antes que '-'.

    Args:
        prior_xi (float): Probabilidad a priori de θ₁
        theta1, theta2 (float): Polarizaciones candidatas
        n_particles (int): Profundidad del árbol
        max_particles (int): Límite de enumeración

    Returns:
        TreeEnumeration: (hojas, coste ponderado final)

    Raises:
        CapExceededError: Si N supera ``max_particles``
    """
    n = _check_tree_size(n_particles, max_particles)
    theta1, theta2 = canonical_angle(theta1), canonical_angle(theta2)

    mass1 = np.array([prior_xi], dtype=np.float64)
    mass2 = np.array([1.0 - prior_xi], dtype=np.float64)
    post = np.array([prior_xi], dtype=np.float64)
    outcomes = np.zeros((1, 0), dtype=np.int8)
    angles = np.zeros((1, 0), dtype=np.float64)
    history = np.zeros((1, 0), dtype=np.float64)

    for _ in range(n):
        phi, post, mass1, mass2 = _expand_level(post, mass1, mass2, theta1, theta2)

        k = outcomes.shape[0]
        signs = np.tile(np.array([UP, DOWN], dtype=np.int8), k)
        outcomes = np.column_stack((np.repeat(outcomes, 2, axis=0), signs))
        angles = np.column_stack((np.repeat(angles, 2, axis=0), np.repeat(phi, 2)))
        history = np.column_stack((np.repeat(history, 2, axis=0), post))

    # weight·min(ξ', 1-ξ') = min(masa₁, masa₂) en cada hoja
    cost = float(np.sum(np.minimum(mass1, mass2)))
    weights = mass1 + mass2
    branches = [
        PosteriorBranch(
            tuple(int(o) for o in outcomes[i]),
            float(weights[i]),
            float(post[i]),
            tuple(angles[i].tolist()),
            tuple(history[i].tolist()),
        )
        for i in range(outcomes.shape[0])
    ]
    logger.debug("Árbol de %d hojas, coste %.12g", len(branches), cost)
    return TreeEnumeration(branches, cost)


def distinct_posteriors(branches: Sequence[PosteriorBranch], depth: int, tol: float = 1e-10) -> List[float]:
    """
    Valores distintos (a ``tol``) de la probabilidad a posteriori tras
    ``depth`` observaciones, entre caminos de peso positivo.
    """
    values = sorted(b.posteriors[depth - 1] for b in branches if b.weight > 0.0)
    clusters: List[float] = []
    for value in values:
        if not clusters or value - clusters[-1] > tol:
            clusters.append(value)
    return clusters


@lru_cache(maxsize=256)
def _group_states(theta1: float, theta2: float, size: int):
    return ensemble_density(theta1, size), ensemble_density(theta2, size)


def group_likelihoods(prior_xi: float, theta1: PolarisationAngle, theta2: PolarisationAngle, size: int) -> Tuple[float, float]:
    """
    Probabilidad de que la medida óptima de un grupo de ``size`` partículas
    indique θ₁, bajo cada hipótesis: (Tr(ρ₁Π₁), Tr(ρ₂Π₁)).

    Con prior degenerado no se mide y la respuesta es la del prior.
    """
    if prior_xi >= 1.0:
        return 1.0, 1.0
    if prior_xi <= 0.0:
        return 0.0, 0.0
    rho1, rho2 = _group_states(canonical_angle(theta1), canonical_angle(theta2), int(size))
    pom = binary_optimal_pom(rho1, rho2, prior_xi)
    return outcome_probability(rho1, pom, 0), outcome_probability(rho2, pom, 0)


def _partition_value(prior_xi: float, theta1: float, theta2: float, groups: Tuple[int, ...]) -> float:
    size = groups[0]
    if len(groups) == 1:
        return binary_bayes_cost_eigen(BinaryProblem(theta1, theta2, prior_xi, size))
    if prior_xi <= 0.0 or prior_xi >= 1.0:
        return 0.0
    p1, p2 = group_likelihoods(prior_xi, theta1, theta2, size)
    value = 0.0
    for l1, l2 in ((p1, p2), (1.0 - p1, 1.0 - p2)):
        weight = prior_xi * l1 + (1.0 - prior_xi) * l2
        if weight <= 0.0:
            continue
        value += weight * _partition_value(prior_xi * l1 / weight, theta1, theta2, groups[1:])
    return value


def partition_cost(
    prior_xi: float,
    theta1: PolarisationAngle,
    theta2: PolarisationAngle,
    partition,
) -> float:
    """
    Coste de Bayes de medir el conjunto por grupos sucesivos.

    Cada grupo se mide como un espín g/2 con la medida óptima binaria frente
    a la probabilidad a posteriori vigente; el último grupo aporta su coste de
    Bayes. Los dos resultados de cada grupo se recorren en orden fijo
    (Π₁ antes que Π₂).

    Args:
        prior_xi (float): Probabilidad a priori de θ₁
        theta1, theta2 (float): Polarizaciones candidatas
        partition: ``Partition`` o secuencia de tamaños

    Returns:
        float: Coste esperado 0-1
    """
    if not isinstance(partition, Partition):
        partition = Partition(tuple(partition))
    return _partition_value(
        prior_xi, canonical_angle(theta1), canonical_angle(theta2), partition.groups
    )


def fixed_angle_cost(
    prior_xi: float,
    theta1: PolarisationAngle,
    theta2: PolarisationAngle,
    phi: float,
    n_particles: int,
) -> float:
    """
    Coste de Bayes midiendo todas las partículas con el mismo ángulo φ.

    Es el problema clásico de lanzar monedas de sesgos b₁(φ) y b₂(φ): la
    probabilidad a posteriori sólo depende del número k de resultados arriba.
    """
    n = int(n_particles)
    k = np.arange(n + 1)
    b1 = bias(theta1, phi)
    b2 = bias(theta2, phi)
    mass1 = prior_xi * binom.pmf(k, n, b1)
    mass2 = (1.0 - prior_xi) * binom.pmf(k, n, b2)
    return float(np.sum(np.minimum(mass1, mass2)))


def total_cost_with_observation(decision_cost: float, measurement_events: int, per_measurement_cost: float) -> float:
    """
    Coste total con utilidad lineal: decisión más coste de cada medición.

    La estrategia combinada hace una sola medición y la secuencial N.
    """
    if decision_cost < 0.0 or measurement_events < 0 or per_measurement_cost < 0.0:
        raise QDecideError("Los costes y el número de mediciones deben ser no negativos")
    return decision_cost + measurement_events * per_measurement_cost

