"""Tests for transforms, per-mode matrices, propagation and projection."""
import math

import numpy as np
import pytest

from core_model import MassTerm, PhysicalParams, SpinorField, gaussian_initial_state, inner_product, make_grid, norm_squared
from errors import FieldError, NumericalWarning
from spectral_engine import (
    SIGMA_X, SIGMA_Z, EnergySign, SpectralPropagator, apply_hamiltonian, branch_energies, check_nyquist_weight,
    dispersion_energy, hamiltonian_matrix, local_conservation_residual, project_energy, projector_matrix,
    projector_table, propagate, propagator_matrix, propagator_table, spectral_derivative, to_momentum, to_position,
)

SIGMA_0_PARAMS = PhysicalParams(mass_term=MassTerm.SIGMA_0)


def _unit_random(grid, rng):
    field = SpinorField(grid, rng.standard_normal((grid.n, 2)) + 1j * rng.standard_normal((grid.n, 2)))
    return field * (1.0 / math.sqrt(norm_squared(field)))


def test_parseval_and_round_trip(small_grid, rng):
    field = _unit_random(small_grid, rng)
    momentum = to_momentum(field)
    assert momentum.norm_squared() * small_grid.dx == pytest.approx(norm_squared(field), rel=1e-13)
    back = to_position(momentum)
    np.testing.assert_allclose(back.values, field.values, rtol=0, atol=1e-13 * np.max(np.abs(field.values)))


def test_constant_field_lives_in_zero_mode(small_grid):
    momentum = to_momentum(SpinorField(small_grid, np.ones((small_grid.n, 2))))
    weights = np.sum(np.abs(momentum.values) ** 2, axis=1)
    assert weights[0] == pytest.approx(np.sum(weights))
    assert np.max(weights[1:]) < 1e-25


def test_plane_wave_occupies_single_mode(small_grid):
    k1 = 5 * small_grid.dk
    values = np.zeros((small_grid.n, 2), dtype=complex)
    values[:, 0] = np.exp(1j * k1 * small_grid.x)
    weights = np.sum(np.abs(to_momentum(SpinorField(small_grid, values)).values) ** 2, axis=1)
    assert int(np.argmax(weights)) == small_grid.mode_index(k1)
    assert np.sum(weights) - np.max(weights) < 1e-20 * np.sum(weights)


def test_dispersion_energy():
    assert dispersion_energy(0.0) == 1.0
    assert dispersion_energy(1.0) == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert dispersion_energy(1e8) / 1e8 == pytest.approx(1.0, rel=1e-12)


def test_hamiltonian_structure():
    np.testing.assert_array_equal(hamiltonian_matrix(0.0), np.diag([1.0, -1.0]))
    for k in (-3.0, -0.2, 0.7, 12.0):
        h = hamiltonian_matrix(k)
        assert np.trace(h) == pytest.approx(0.0, abs=1e-15)
        assert np.linalg.det(h).real == pytest.approx(-dispersion_energy(k) ** 2, rel=1e-12)
        np.testing.assert_allclose(h, h.conj().T)
        np.testing.assert_allclose(np.linalg.eigvalsh(h), [-dispersion_energy(k), dispersion_energy(k)], rtol=1e-12)


def test_sigma0_reading_hamiltonian():
    h = hamiltonian_matrix(0.5, SIGMA_0_PARAMS)
    np.testing.assert_allclose(h, 0.5 * SIGMA_X + np.eye(2))
    upper, lower = branch_energies(0.5, SIGMA_0_PARAMS)
    assert (upper, lower) == pytest.approx((1.5, 0.5))


def test_propagator_examples():
    np.testing.assert_allclose(propagator_matrix(0.7, 0.0), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(propagator_matrix(0.0, 2 * math.pi), np.eye(2), atol=1e-13)
    k, dt = 0.8, 3.3
    energies, vectors = np.linalg.eigh(hamiltonian_matrix(k))
    plus = vectors[:, np.argmax(energies)]
    np.testing.assert_allclose(propagator_matrix(k, dt) @ plus, np.exp(-1j * dispersion_energy(k) * dt) * plus, atol=1e-13)


@pytest.mark.parametrize("params", [PhysicalParams(), SIGMA_0_PARAMS, PhysicalParams(m=0.5, c=2.0, hbar=0.7)])
def test_mode_tables_are_unitary_and_projective(params):
    grid = make_grid(-10, 10, 64)
    u = propagator_table(grid, 1.7, params).table
    identity = np.broadcast_to(np.eye(2), u.shape)
    np.testing.assert_allclose(np.einsum("kji,kjl->kil", u.conj(), u), identity, atol=1e-13)
    np.testing.assert_allclose(np.einsum("kij,kjl->kil", u, propagator_matrix(grid.k, -1.7, params)), identity, atol=1e-13)
    plus = projector_table(grid, EnergySign.PLUS, params).table
    minus = projector_table(grid, EnergySign.MINUS, params).table
    np.testing.assert_allclose(plus + minus, identity, atol=1e-13)
    np.testing.assert_allclose(np.einsum("kij,kjl->kil", plus, plus), plus, atol=1e-13)
    np.testing.assert_allclose(plus, np.conj(np.transpose(plus, (0, 2, 1))), atol=1e-15)


def test_propagate_examples(small_grid, rng):
    field = _unit_random(small_grid, rng)
    assert propagate(field, 0.0) is field
    back = propagate(propagate(field, 12.5), -12.5)
    np.testing.assert_allclose(back.values, field.values, atol=1e-12)
    assert propagate(field, 2.0).time == pytest.approx(2.0)


def test_reference_return_amplitude_matches_quadrature(reference, exact_return_amplitude):
    initial = reference.build_initial_field()
    evolved = propagate(initial, 40.0)
    amplitude = inner_product(initial.restamped(40.0), evolved)
    assert amplitude.real == pytest.approx(exact_return_amplitude.real, abs=1e-8)
    assert amplitude.imag == pytest.approx(0.0, abs=1e-12)


def test_algebra_on_random_fields(small_grid, rng):
    for _ in range(20):
        f, g = _unit_random(small_grid, rng), _unit_random(small_grid, rng)
        a, b = rng.uniform(-40, 40, size=2)
        evolved = propagate(f, a)
        assert norm_squared(evolved) == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(propagate(f, a + b).values, propagate(evolved, b).values, atol=1e-12)
        plus = project_energy(f, "+")
        minus = project_energy(f, "-")
        np.testing.assert_allclose((plus + minus).values, f.values, atol=1e-13)
        np.testing.assert_allclose(project_energy(plus, "+").values, plus.values, atol=1e-13)
        assert abs(inner_product(plus, project_energy(g, "-"))) <= 1e-12
        np.testing.assert_allclose(project_energy(evolved, "+").values, propagate(plus, a).values, atol=1e-12)
        assert inner_product(plus, apply_hamiltonian(plus)).real >= 0.0
        assert inner_product(minus, apply_hamiltonian(minus)).real <= 0.0


def test_projection_does_not_renormalize(reference):
    plus = project_energy(reference.build_initial_field(), "+")
    assert 0.0 < norm_squared(plus) < 1.0
    assert norm_squared(plus) == pytest.approx(0.5, abs=1e-12)


def test_zero_mode_projection_keeps_upper_component(small_grid):
    field = SpinorField(small_grid, np.ones((small_grid.n, 2)))
    plus = project_energy(field, EnergySign.PLUS)
    np.testing.assert_allclose(plus.psi1, 1.0, atol=1e-13)
    np.testing.assert_allclose(plus.psi2, 0.0, atol=1e-13)
    np.testing.assert_allclose(projector_matrix(0.0, "+"), np.diag([1.0, 0.0]))


def test_sigma0_zero_mode_projection_uses_sigma_x_axis():
    np.testing.assert_allclose(projector_matrix(0.0, "+", SIGMA_0_PARAMS), 0.5 * (np.eye(2) + SIGMA_X))
    np.testing.assert_allclose(projector_matrix(2.0, "-"), 0.5 * (np.eye(2) - hamiltonian_matrix(2.0) / dispersion_energy(2.0)))


def test_energy_sign_symbols():
    assert EnergySign.from_symbol("+") is EnergySign.PLUS
    assert EnergySign.from_symbol("minus") is EnergySign.MINUS
    with pytest.raises(ValueError):
        EnergySign.from_symbol("?")


def test_spectral_propagator_matches_propagate(small_grid):
    field = gaussian_initial_state(small_grid, 1.5, (1, 1j))
    propagator = SpectralPropagator(field)
    for t in (0.0, 0.3, 4.0, -2.0):
        np.testing.assert_allclose(propagator.at(t).values, propagate(field, t).values, atol=1e-13)
    assert [f.time for f in propagator.iter_times([1.0, 2.0])] == [1.0, 2.0]


def test_nyquist_weight_warning(small_grid):
    alternating = np.outer((-1.0) ** np.arange(small_grid.n), [1.0, 0.0])
    with pytest.warns(NumericalWarning):
        weight = check_nyquist_weight(SpinorField(small_grid, alternating))
    assert weight == pytest.approx(1.0)
    assert check_nyquist_weight(gaussian_initial_state(small_grid, 2.0)) < 1e-12


def test_spectral_derivative_is_exact_for_resolved_modes(small_grid):
    k = 3 * small_grid.dk
    derivative = spectral_derivative(np.sin(k * small_grid.x), small_grid)
    np.testing.assert_allclose(derivative, k * np.cos(k * small_grid.x), atol=1e-12)
    stacked = np.stack([np.sin(k * small_grid.x), np.cos(k * small_grid.x)], axis=1).astype(complex)
    np.testing.assert_allclose(spectral_derivative(stacked, small_grid)[:, 1], -k * np.sin(k * small_grid.x), atol=1e-12)


def test_local_conservation_residual_static_zero(small_grid):
    zeros = np.zeros((3, small_grid.n))
    assert local_conservation_residual(np.array([0.0, 0.1, 0.2]), zeros, zeros, small_grid) == 0.0
    with pytest.raises(FieldError):
        local_conservation_residual(np.array([0.0, 0.1]), zeros[:2], zeros[:2], small_grid)
    with pytest.raises(FieldError):
        local_conservation_residual(np.array([0.0, 0.1, 0.5]), zeros, zeros, small_grid)


def test_sigma_matrices_square_to_identity():
    for sigma in (SIGMA_X, SIGMA_Z):
        np.testing.assert_array_equal(sigma @ sigma, np.eye(2))
