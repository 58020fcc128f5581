import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.exceptions import CapExceededError, NumericalInconsistencyError, QDecideError
from core.numkernel import trace
from core.states import (
    DensityOperator,
    amplitude_vector,
    canonical_angle,
    density_from_amplitudes,
    ensemble_density,
    half_angle,
    log_binomial_weights,
    overlap_delta_squared,
    overlap_delta_squared_binomial,
    qubit_density,
    spin_up_projector,
    state_overlap_squared,
    symmetric_angles,
    wrap_angle,
)


def test_canonical_and_wrapped_angles():
    assert canonical_angle(-0.1) == pytest.approx(2 * math.pi - 0.1)
    assert canonical_angle(2 * math.pi) == 0.0
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert wrap_angle(math.pi) == pytest.approx(math.pi)


def test_half_angle():
    assert half_angle(0.0, math.pi / 2) == pytest.approx(math.pi / 4)
    assert half_angle(0.0, 3 * math.pi / 2) == pytest.approx(math.pi / 4)
    assert half_angle(0.0, math.pi) == pytest.approx(math.pi / 2)
    t1, t2 = symmetric_angles(0.3)
    assert half_angle(t1, t2) == pytest.approx(0.3)


def test_qubit_density_entries():
    theta = 0.9
    rho = qubit_density(theta).matrix
    expected = 0.5 * np.array(
        [[1.0, np.exp(1j * theta)], [np.exp(-1j * theta), 1.0]]
    )
    assert_allclose(rho, expected, atol=1e-15)


def test_qubit_density_matches_single_particle_ensemble():
    assert_allclose(qubit_density(1.3).matrix, ensemble_density(1.3, 1).matrix)


def test_spin_up_projector_is_a_projector():
    p = spin_up_projector(2.1)
    assert_allclose(p @ p, p, atol=1e-15)
    assert trace(p) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_ensemble_density_is_a_pure_state(n, rng):
    theta = float(rng.uniform(0.0, 2 * math.pi))
    rho = ensemble_density(theta, n)
    assert rho.dim == n + 1
    rho.verify()
    assert trace(rho.matrix) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [1, 3, 8])
def test_density_equals_outer_product_of_amplitudes(n):
    u = amplitude_vector(0.4, n)
    assert u.norm() == pytest.approx(1.0)
    assert_allclose(density_from_amplitudes(u).matrix, ensemble_density(0.4, n).matrix, atol=1e-14)


@pytest.mark.parametrize("n", [1, 4, 12])
def test_density_fixes_conjugate_amplitude_vector(n, rng):
    theta = float(rng.uniform(0.0, 2 * math.pi))
    u = np.conj(amplitude_vector(theta, n).entries)
    assert_allclose(ensemble_density(theta, n).matrix @ u, u, atol=1e-13)


def test_large_ensemble_stays_finite():
    rho = ensemble_density(0.3, 400)
    assert np.all(np.isfinite(rho.matrix))
    assert trace(rho.matrix).real == pytest.approx(1.0, abs=1e-10)


def test_log_binomial_weights_are_normalised():
    w = log_binomial_weights(30)
    assert np.sum(np.exp(2.0 * w)) == pytest.approx(1.0, abs=1e-13)


def test_particle_limits():
    with pytest.raises(CapExceededError):
        ensemble_density(0.0, 513)
    with pytest.raises(QDecideError):
        ensemble_density(0.0, 0)
    assert ensemble_density(0.0, 20, max_particles=20).particle_count == 20


def test_verify_flags_mixed_state():
    mixed = DensityOperator(np.eye(2) / 2.0, 1)
    with pytest.raises(NumericalInconsistencyError):
        mixed.verify()


@pytest.mark.parametrize("n", [1, 2, 7, 16, 33, 64])
def test_binomial_sum_matches_cosine_power(n):
    for delta in np.linspace(0.0, math.pi / 2, 50):
        closed = overlap_delta_squared(delta, n)
        assert overlap_delta_squared_binomial(delta, n) == pytest.approx(closed, abs=1e-12)
        assert overlap_delta_squared(delta, n, verify=True) == closed


def test_state_overlap_of_amplitude_vectors():
    u = amplitude_vector(0.2, 6)
    v = amplitude_vector(1.4, 6)
    expected = math.cos(0.6) ** 12
    assert state_overlap_squared(u, v) == pytest.approx(expected, abs=1e-14)
