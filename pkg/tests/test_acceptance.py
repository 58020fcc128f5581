"""
Propiedades de extremo a extremo: igualdad entre la medición secuencial
adaptativa y la combinada, recombinación del árbol, estructura de rango dos,
optimalidad de la medida, monotonía en N y calibración de Monte Carlo.
"""

import math

import numpy as np
import pytest

from core.decision import (
    BinaryProblem,
    bayes_cost_from_upsilon,
    binary_bayes_cost_eigen,
    binary_optimal_pom,
    binary_problem_spectrum,
    check_optimality,
    combined_cost_closed,
    expected_cost,
    gamma,
    rank2_eigenvalues,
    risk_operators,
)
from core.montecarlo import SimulationConfig, analytic_cost, simulate
from core.sequential import (
    DOWN,
    UP,
    Partition,
    closed_posterior,
    compositions,
    distinct_posteriors,
    enumerate_tree,
    legacy_single_particle_cost,
    one_step_cost,
    optimal_angle,
    partition_cost,
    sequential_cost_closed,
)
from core.states import overlap_delta_squared, overlap_delta_squared_binomial, symmetric_angles
from utils.output import OutputRecord, emit

XI_GRID = [round(0.05 * k, 2) for k in range(1, 20)]
DELTA_GRID = [k * math.pi / 24 for k in range(1, 13)]
SPOT_CELLS = [(0.05, math.pi / 24), (0.35, math.pi / 6), (0.5, math.pi / 4), (0.8, 5 * math.pi / 12), (0.95, math.pi / 2)]


def grid_cells(n):
    if n <= 10:
        return [(xi, delta) for xi in XI_GRID for delta in DELTA_GRID]
    return SPOT_CELLS


@pytest.mark.parametrize("n", range(1, 13))
def test_sequential_tree_equals_combined_measurement(n):
    for xi, delta in grid_cells(n):
        t1, t2 = symmetric_angles(delta)
        tree = enumerate_tree(xi, t1, t2, n)
        eigen = binary_bayes_cost_eigen(BinaryProblem(t1, t2, xi, n))
        assert abs(tree.cost - eigen) <= 1e-10, (xi, delta, n)
        assert abs(tree.cost - sequential_cost_closed(xi, delta, n)) <= 1e-10, (xi, delta, n)


@pytest.mark.parametrize("n", range(1, 13))
def test_tree_recombines_into_two_posteriors(n):
    for xi, delta in grid_cells(n)[::7]:
        t1, t2 = symmetric_angles(delta)
        tree = enumerate_tree(xi, t1, t2, n)
        for depth in range(1, n + 1):
            values = distinct_posteriors(tree.branches, depth)
            expected = sorted(closed_posterior(xi, depth, s, delta) for s in (UP, DOWN))
            assert len(values) == 2, (xi, delta, depth)
            assert values == pytest.approx(expected, abs=1e-10)


def test_rank_two_structure(rng):
    for _ in range(20):
        xi = float(rng.uniform(0.05, 0.95))
        delta = float(rng.uniform(0.05, math.pi / 2 - 0.05))
        n = int(rng.integers(1, 51))
        problem = BinaryProblem.from_delta(xi, delta, n)
        eta = binary_problem_spectrum(problem).eigenvalues
        plus, minus = rank2_eigenvalues(gamma(xi), math.cos(delta) ** (2 * n))
        assert eta[-1] == pytest.approx(plus, abs=1e-10)
        assert eta[0] == pytest.approx(minus, abs=1e-10)
        assert np.max(np.abs(eta[1:-1]), initial=0.0) <= 1e-10
        assert binary_bayes_cost_eigen(problem) == pytest.approx(
            combined_cost_closed(xi, delta, n), abs=1e-10
        )


@pytest.mark.parametrize("n", [1, 5, 17, 40, 64])
def test_binomial_overlap_identity(n):
    for delta in np.linspace(0.0, math.pi / 2, 50):
        assert overlap_delta_squared_binomial(delta, n) == pytest.approx(
            overlap_delta_squared(delta, n), abs=1e-12
        )


def test_optimal_pom_certified_on_random_problems(rng):
    for _ in range(50):
        xi = float(rng.uniform(0.05, 0.95))
        t1, t2 = rng.uniform(0.0, 2 * math.pi, size=2)
        n = int(rng.integers(1, 7))
        problem = BinaryProblem(float(t1), float(t2), xi, n)
        hypotheses = problem.hypotheses()
        rho1, rho2 = problem.states()
        pom = binary_optimal_pom(rho1, rho2, xi)
        risks = risk_operators(hypotheses, problem.costs)
        report = check_optimality(risks, pom)
        assert report.upsilon_asymmetry <= 1e-9
        assert min(report.min_eigenvalue_excess) >= -1e-9
        cost = expected_cost(hypotheses, problem.costs, pom)
        assert bayes_cost_from_upsilon(risks, pom) == pytest.approx(cost, abs=1e-10)


def test_detector_angle_is_optimal(rng):
    phis = np.linspace(0.0, 2 * math.pi, 10_000, endpoint=False)
    for _ in range(100):
        xi = float(rng.uniform(0.01, 0.99))
        t1, t2 = (float(v) for v in rng.uniform(0.0, 2 * math.pi, size=2))
        best = one_step_cost(xi, t1, t2, optimal_angle(xi, t1, t2))
        assert best <= float(np.min(one_step_cost(xi, t1, t2, phis))) + 1e-9


@pytest.mark.parametrize("xi, delta", [(0.5, math.pi / 5), (0.8, math.pi / 8)])
def test_partial_combinations_report(xi, delta, tmp_path):
    t1, t2 = symmetric_angles(delta)
    records = []
    for n in range(1, 9):
        combined = combined_cost_closed(xi, delta, n)
        for partition in compositions(n):
            cost = partition_cost(xi, t1, t2, partition)
            assert cost >= combined - 1e-9, str(partition)
            records.append(
                OutputRecord(xi, delta, n, str(partition), cost, "partition", {"gap": cost - combined})
            )
    assert len(records) == sum(2 ** (n - 1) for n in range(1, 9))
    report = tmp_path / "partition_gaps.csv"
    with report.open("w", encoding="utf-8") as handle:
        emit(records, "csv", handle, extra_fields=("gap",))
    assert report.read_text(encoding="utf-8").count("\n") == len(records) + 2


def test_combined_cost_strictly_decreases_in_n():
    for xi in XI_GRID:
        for delta in DELTA_GRID[:-1]:
            costs = [combined_cost_closed(xi, delta, n) for n in range(1, 51)]
            assert all(b < a for a, b in zip(costs, costs[1:])), (xi, delta)


def test_monte_carlo_calibration():
    cells = []
    for xi in (0.3, 0.5, 0.7, 0.85):
        for delta in (math.pi / 8, math.pi / 5):
            cells.append((xi, delta, Partition.sequential(3)))
            cells.append((xi, delta, Partition((2, 2))))
    cells += [
        (0.6, math.pi / 6, Partition.combined(2)),
        (0.4, math.pi / 7, Partition((1, 2))),
        (0.55, math.pi / 9, Partition.sequential(5)),
        (0.65, math.pi / 10, Partition((3, 1))),
    ]
    assert len(cells) == 20

    within = 0
    for k, (xi, delta, strategy) in enumerate(cells):
        problem = BinaryProblem.from_delta(xi, delta, strategy.n_particles)
        config = SimulationConfig(problem, strategy, 100_000, seed=1000 + k)
        result = simulate(config)
        if abs(result.z_score(analytic_cost(problem, strategy))) <= 4.0:
            within += 1
        assert simulate(config) == result
    assert within >= 19


def test_published_single_particle_expression_is_not_the_bayes_cost():
    delta = math.pi / 6
    for d in (delta, 0.3, 1.1):
        eigen = binary_bayes_cost_eigen(BinaryProblem.from_delta(0.5, d, 1))
        assert legacy_single_particle_cost(0.5, d) == pytest.approx(eigen, abs=1e-10)
    eigen = binary_bayes_cost_eigen(BinaryProblem.from_delta(0.9, delta, 1))
    gap = legacy_single_particle_cost(0.9, delta) - eigen
    assert gap == pytest.approx(0.123062060751, abs=1e-10)
    assert legacy_single_particle_cost(1.0, delta) > 0.0
