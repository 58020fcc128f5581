"""
Simulación de Monte Carlo de las estrategias secuencial, combinada y por grupos.

Los ensayos se reparten en bloques de ``block_size``. El bloque b usa su propio
generador ``PCG64(SeedSequence(seed, spawn_key=(b,)))``, así que el resultado
depende sólo de (configuración, semilla) y no del número de hilos ni del
orden en que terminan los bloques.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from constants.tolerances import BLOCK_SIZE, DEFAULT_WORKERS
from core.decision import BinaryProblem, combined_cost_closed
from core.exceptions import QDecideError
from core.sequential import (
    Partition,
    bias,
    bias_down,
    group_likelihoods,
    partition_cost,
    policy_angles,
    sequential_cost_closed,
)

logger = logging.getLogger(__name__)

MAX_SEED = 2 ** 64 - 1


@dataclass(frozen=True)
class SimulationConfig:
    problem: BinaryProblem
    strategy: Partition
    trials: int
    seed: int = 0
    block_size: int = BLOCK_SIZE

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise QDecideError(f"El número de ensayos debe ser >= 1: {self.trials}")
        if not 0 <= int(self.seed) <= MAX_SEED:
            raise QDecideError(f"La semilla debe ser un entero de 64 bits sin signo: {self.seed}")
        if self.block_size < 1:
            raise QDecideError(f"Tamaño de bloque inválido: {self.block_size}")
        if self.strategy.n_particles != self.problem.n_particles:
            raise QDecideError(
                f"La estrategia {self.strategy} no suma N = {self.problem.n_particles}"
            )


@dataclass(frozen=True)
class SimulationResult:
    error_rate: float
    standard_error: float
    trials: int
    per_hypothesis_error: Tuple[float, float]

    def z_score(self, analytic_cost: float) -> float:
        """Desviación respecto al coste analítico en unidades de σ analítica."""
        sigma = math.sqrt(max(analytic_cost * (1.0 - analytic_cost), 0.0) / self.trials)
        if sigma == 0.0:
            return 0.0
        return (self.error_rate - analytic_cost) / sigma


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Generador del bloque ``block`` derivado de ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(block),))))


@lru_cache(maxsize=1024)
def _cached_group_likelihoods(prior_xi: float, theta1: float, theta2: float, size: int):
    return group_likelihoods(prior_xi, theta1, theta2, size)


def _group_arrays(posteriors: np.ndarray, theta1: float, theta2: float, size: int):
    # Tras la recombinación sólo hay unos pocos valores distintos
    values, inverse = np.unique(posteriors, return_inverse=True)
    table = np.array(
        [_cached_group_likelihoods(float(v), theta1, theta2, size) for v in values]
    ).reshape(-1, 2)
    return table[inverse, 0], table[inverse, 1]


def _simulate_block(config: SimulationConfig, block: int, size: int) -> Tuple[int, int, int, int]:
    """
    Simula ``size`` ensayos del bloque ``block``.

    Returns:
        tuple: (errores bajo H1, ensayos bajo H1, errores bajo H2, ensayos bajo H2)
    """
    problem = config.problem
    theta1, theta2 = problem.theta1, problem.theta2
    rng = block_generator(config.seed, block)

    truth_is_first = rng.random(size) < problem.prior_xi
    post = np.full(size, problem.prior_xi, dtype=np.float64)
    for group in config.strategy.groups:
        u = rng.random(size)
        if group == 1:
            phi = policy_angles(post, theta1, theta2)
            l1, l2 = bias(theta1, phi), bias(theta2, phi)
            d1, d2 = bias_down(theta1, phi), bias_down(theta2, phi)
        else:
            l1, l2 = _group_arrays(post, theta1, theta2, group)
            d1, d2 = 1.0 - l1, 1.0 - l2
        first = u < np.where(truth_is_first, l1, l2)
        a1 = np.where(first, l1, d1)
        a2 = np.where(first, l2, d2)
        numerator = post * a1
        denominator = numerator + (1.0 - post) * a2
        post = np.divide(numerator, denominator, out=post.copy(), where=denominator > 0.0)

    decide_first = post >= 0.5
    wrong = decide_first != truth_is_first
    return (
        int(np.count_nonzero(wrong & truth_is_first)),
        int(np.count_nonzero(truth_is_first)),
        int(np.count_nonzero(wrong & ~truth_is_first)),
        int(np.count_nonzero(~truth_is_first)),
    )


def simulate(config: SimulationConfig, workers: int = DEFAULT_WORKERS) -> SimulationResult:
    """
    Estima por simulación la tasa de error 0-1 de la estrategia.

    En cada ensayo se sortea la hipótesis verdadera según ξ, se simulan los
    resultados (por partícula con el ángulo óptimo adaptativo, o por grupo con
    la medida óptima binaria) y se decide con la regla de Bayes al final.

    Args:
        config (SimulationConfig): Problema, estrategia, ensayos y semilla
        workers (int): Número máximo de hilos

    Returns:
        SimulationResult: Tasa de error, error estándar y tasas por hipótesis
    """
    n_blocks = -(-config.trials // config.block_size)
    sizes = [
        min(config.block_size, config.trials - b * config.block_size) for b in range(n_blocks)
    ]
    logger.debug(
        "Simulando %d ensayos en %d bloques con %d hilos", config.trials, n_blocks, workers
    )

    with ThreadPoolExecutor(max_workers=max(1, int(workers))) as executor:
        counts = list(executor.map(lambda b: _simulate_block(config, b, sizes[b]), range(n_blocks)))

    errors1 = sum(c[0] for c in counts)
    trials1 = sum(c[1] for c in counts)
    errors2 = sum(c[2] for c in counts)
    trials2 = sum(c[3] for c in counts)

    rate = (errors1 + errors2) / config.trials
    standard_error = math.sqrt(rate * (1.0 - rate) / config.trials)
    per_hypothesis = (
        errors1 / trials1 if trials1 else 0.0,
        errors2 / trials2 if trials2 else 0.0,
    )
    return SimulationResult(rate, standard_error, config.trials, per_hypothesis)


def analytic_cost(problem: BinaryProblem, strategy: Partition) -> float:
    """Coste de Bayes exacto de la estrategia, para contrastar la simulación."""
    if strategy.is_combined:
        return combined_cost_closed(problem.prior_xi, problem.delta, problem.n_particles)
    if strategy.is_sequential:
        return sequential_cost_closed(problem.prior_xi, problem.delta, problem.n_particles)
    return partition_cost(problem.prior_xi, problem.theta1, problem.theta2, strategy)
