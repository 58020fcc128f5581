import math

import numpy as np
import pytest

from core.decision import BinaryProblem
from core.exceptions import QDecideError
from core.montecarlo import (
    SimulationConfig,
    SimulationResult,
    analytic_cost,
    block_generator,
    simulate,
)
from core.sequential import Partition, partition_cost


def make_config(xi=0.6, delta=0.5, n=3, strategy=None, trials=20_000, seed=7, **kwargs):
    problem = BinaryProblem.from_delta(xi, delta, n)
    strategy = strategy or Partition.sequential(n)
    return SimulationConfig(problem, strategy, trials, seed, **kwargs)


def test_config_validation():
    problem = BinaryProblem.from_delta(0.5, 0.5, 3)
    with pytest.raises(QDecideError):
        SimulationConfig(problem, Partition((1, 1)), 100)
    with pytest.raises(QDecideError):
        SimulationConfig(problem, Partition.sequential(3), 0)
    with pytest.raises(QDecideError):
        SimulationConfig(problem, Partition.sequential(3), 100, seed=-1)


def test_block_generators_are_independent_of_order():
    a = block_generator(11, 3).random(4)
    b = block_generator(11, 3).random(4)
    c = block_generator(11, 4).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_fixed_seed_is_reproducible_across_worker_counts():
    config = make_config(block_size=4096)
    first = simulate(config, workers=1)
    second = simulate(config, workers=4)
    assert first == second


def test_different_seeds_differ():
    assert simulate(make_config(seed=1)).error_rate != simulate(make_config(seed=2)).error_rate


def test_orthogonal_states_never_err():
    config = make_config(xi=0.5, delta=math.pi / 2, n=2, trials=5_000)
    result = simulate(config)
    assert result.error_rate == 0.0
    assert result.standard_error == 0.0
    assert result.per_hypothesis_error == (0.0, 0.0)


def test_z_score():
    result = SimulationResult(0.11, 0.003, 10_000, (0.1, 0.12))
    sigma = math.sqrt(0.1 * 0.9 / 10_000)
    assert result.z_score(0.1) == pytest.approx(0.01 / sigma)
    assert SimulationResult(0.0, 0.0, 100, (0.0, 0.0)).z_score(0.0) == 0.0


def test_analytic_cost_dispatch():
    problem = BinaryProblem.from_delta(0.3, 0.6, 3)
    seq = analytic_cost(problem, Partition.sequential(3))
    comb = analytic_cost(problem, Partition.combined(3))
    assert seq == pytest.approx(comb, abs=1e-12)
    mixed = Partition((2, 1))
    assert analytic_cost(problem, mixed) == pytest.approx(
        partition_cost(0.3, problem.theta1, problem.theta2, mixed)
    )


@pytest.mark.parametrize(
    "strategy",
    [Partition.sequential(3), Partition.combined(3), Partition((2, 1)), Partition((1, 2))],
    ids=str,
)
def test_simulation_agrees_with_analytic_cost(strategy):
    config = make_config(xi=0.55, delta=0.6, n=3, strategy=strategy, trials=100_000, seed=3)
    result = simulate(config)
    analytic = analytic_cost(config.problem, strategy)
    assert abs(result.z_score(analytic)) <= 4.5
    assert result.trials == 100_000


@pytest.mark.parametrize("strategy", [Partition.sequential(4), Partition.combined(4)], ids=str)
def test_identical_states_err_at_the_prior_rate(strategy):
    config = make_config(xi=0.3, delta=0.0, n=4, strategy=strategy, trials=50_000, seed=5)
    result = simulate(config)
    assert abs(result.z_score(0.3)) <= 4.0
    assert result.per_hypothesis_error == (1.0, 0.0)


def test_sequential_and_combined_simulations_agree():
    sequential = simulate(make_config(xi=0.4, delta=0.45, n=4, trials=100_000, seed=11))
    combined = simulate(
        make_config(xi=0.4, delta=0.45, n=4, strategy=Partition.combined(4), trials=100_000, seed=12)
    )
    joint = math.hypot(sequential.standard_error, combined.standard_error)
    assert abs(sequential.error_rate - combined.error_rate) <= 4.0 * joint


def test_near_orthogonal_sequential_simulation():
    config = make_config(xi=0.3, delta=11 * math.pi / 24, n=5, trials=50_000, seed=13)
    result = simulate(config)
    assert result.error_rate <= 1e-4
    assert abs(result.z_score(analytic_cost(config.problem, config.strategy))) <= 4.5
