"""Tests for grids, spinor fields, scenarios and time series."""
import logging
import math

import numpy as np
import pytest

from core_model import (
    RSINormalization, Scenario, SeriesKind, SpinorField, TimeSeries,
    gaussian_initial_state, inner_product, make_grid, norm_squared, reference_scenario,
)
from errors import FieldError, GridError, GridMismatchError, ScenarioError


def _random_field(grid, rng):
    return SpinorField(grid, rng.standard_normal((grid.n, 2)) + 1j * rng.standard_normal((grid.n, 2)))


def test_reference_grid_spacing():
    grid = make_grid(-80, 80, 4096)
    assert grid.dx == pytest.approx(0.0390625, abs=1e-15)
    assert grid.dk == pytest.approx(2 * math.pi / 160, rel=1e-15)
    assert grid.x[0] == -80.0
    assert grid.x[2048] == pytest.approx(0.0, abs=1e-12)


def test_small_grid_modes():
    grid = make_grid(-1, 1, 8)
    assert sorted(grid.mode_numbers.tolist()) == [-4, -3, -2, -1, 0, 1, 2, 3]
    np.testing.assert_allclose(np.sort(grid.k), math.pi * np.arange(-4, 4), atol=1e-14)
    assert grid.k[grid.nyquist_index] == pytest.approx(-4 * math.pi)


@pytest.mark.parametrize("args", [(0, 1, 7), (0, 1, 4), (0, 1, 12), (1, 1, 8), (2, 1, 8)])
def test_make_grid_rejects(args):
    with pytest.raises(GridError):
        make_grid(*args)


def test_grid_tables_read_only():
    grid = make_grid(-1, 1, 8)
    with pytest.raises(ValueError):
        grid.x[0] = 5.0


def test_mirror_indices_reflect_coordinates():
    grid = make_grid(-4, 4, 16)
    assert grid.is_symmetric()
    mirrored = grid.x[grid.mirror_indices]
    np.testing.assert_allclose(mirrored[1:], -grid.x[1:], atol=1e-14)


def test_mode_index_on_and_off_grid():
    grid = make_grid(-80, 80, 4096)
    assert grid.mode_index(3 * grid.dk) == 3
    assert grid.mode_index(-2 * grid.dk) == 4096 - 2
    assert grid.mode_index(0.5 * grid.dk) is None


def test_gaussian_reference_values(reference):
    field = reference.build_initial_field()
    center = 2048
    expected = (1.0 / (32.0 * math.pi)) ** 0.25
    assert field.psi1[center] == pytest.approx(expected, rel=1e-12)
    assert field.psi2[center] == pytest.approx(expected, rel=1e-12)
    rho0 = abs(field.psi1[center]) ** 2 + abs(field.psi2[center]) ** 2
    assert rho0 == pytest.approx(1.0 / math.sqrt(8.0 * math.pi), rel=1e-12)
    assert norm_squared(field) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("sigma,weights", [
    (0.5, (1, 0)),
    (2.0, (1j, 2 - 1j)),
    (3.7, (0.2, -0.9j)),
])
def test_gaussian_is_normalized(sigma, weights):
    grid = make_grid(-40, 40, 2048)
    assert norm_squared(gaussian_initial_state(grid, sigma, weights)) == pytest.approx(1.0, abs=1e-12)


def test_gaussian_rejects_bad_input():
    grid = make_grid(-80, 80, 4096)
    with pytest.raises(FieldError):
        gaussian_initial_state(grid, 0.01)
    with pytest.raises(FieldError):
        gaussian_initial_state(grid, -1.0)
    with pytest.raises(FieldError):
        gaussian_initial_state(grid, 2.0, (0, 0))


def test_inner_product_is_sesquilinear(small_grid, rng):
    for _ in range(10):
        f, g, h = (_random_field(small_grid, rng) for _ in range(3))
        a, b = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
        left = inner_product(f, a * g + b * h)
        right = a * inner_product(f, g) + b * inner_product(f, h)
        assert abs(left - right) <= 1e-12 * max(1.0, abs(left))
        anti = inner_product(a * f, g)
        assert abs(anti - a.conjugate() * inner_product(f, g)) <= 1e-12 * max(1.0, abs(anti))
        assert inner_product(f, g) == pytest.approx(inner_product(g, f).conjugate(), rel=1e-13)
        assert norm_squared(f) == pytest.approx(abs(inner_product(f, f)), rel=1e-14)


def test_inner_product_examples(small_grid):
    f = gaussian_initial_state(small_grid, 1.0)
    assert inner_product(f, f) == pytest.approx(1.0, abs=1e-12)
    left = gaussian_initial_state(small_grid, 0.5, center=-6.0)
    right = gaussian_initial_state(small_grid, 0.5, center=6.0)
    disjoint = SpinorField(small_grid, left.values * (small_grid.x < 0)[:, None])
    other = SpinorField(small_grid, right.values * (small_grid.x > 0)[:, None])
    assert inner_product(disjoint, other) == 0


def test_inner_product_grid_mismatch_is_error(small_grid):
    f = SpinorField.zeros(small_grid)
    g = SpinorField.zeros(make_grid(-12.8, 12.8, 128))
    with pytest.raises(GridMismatchError):
        inner_product(f, g)


def test_inner_product_time_mismatch_only_warns(small_grid, caplog):
    f = gaussian_initial_state(small_grid, 1.0, time=0.0)
    g = f.restamped(1.0)
    with caplog.at_level(logging.WARNING):
        value = inner_product(f, g)
    assert value == pytest.approx(1.0, abs=1e-12)
    assert "different times" in caplog.text


def test_norm_squared_scaling(reference):
    field = reference.build_initial_field()
    assert norm_squared(SpinorField.zeros(reference.grid)) == 0.0
    assert norm_squared(2 * field) == pytest.approx(4.0, abs=1e-12)


def test_spinor_field_validation(small_grid):
    with pytest.raises(FieldError):
        SpinorField(small_grid, np.zeros((10, 2)))
    bad = np.zeros((small_grid.n, 2), dtype=complex)
    bad[3, 1] = np.nan
    with pytest.raises(FieldError):
        SpinorField(small_grid, bad)
    field = SpinorField(small_grid, np.ones((small_grid.n, 2)))
    with pytest.raises(ValueError):
        field.values[0, 0] = 2.0


def test_scenario_invariants(small_grid):
    with pytest.raises(ScenarioError):
        Scenario(grid=small_grid, t_i=5.0, t_f=1.0)
    with pytest.raises(ScenarioError):
        Scenario(grid=small_grid, n_steps=400, snapshot_stride=7)
    with pytest.raises(ScenarioError):
        Scenario(grid=small_grid, n_steps=0)
    other = SpinorField.zeros(make_grid(-1, 1, 8))
    with pytest.raises(ScenarioError):
        Scenario(grid=small_grid, final_state=other)


def test_snapshot_times(reference):
    times = reference.snapshot_times()
    assert len(times) == 401
    assert times[0] == 0.0 and times[-1] == 40.0
    np.testing.assert_allclose(np.diff(times), 0.1, rtol=1e-12)
    strided = reference.with_overrides(snapshot_stride=4).snapshot_times()
    assert len(strided) == 101


def test_degenerate_scenario_has_single_snapshot(small_grid):
    scenario = Scenario(grid=small_grid, initial_sigma=1.0, t_i=3.0, t_f=3.0)
    assert scenario.snapshot_times().tolist() == [3.0]


def test_fingerprint_is_stable_and_sensitive():
    a, b = reference_scenario(), reference_scenario()
    assert a.fingerprint() == b.fingerprint()
    assert reference_scenario(grid_n=8192).fingerprint() != a.fingerprint()
    assert reference_scenario(rsi_normalization=RSINormalization.RAW).fingerprint() != a.fingerprint()


def test_final_field_defaults_to_initial(reference):
    initial = reference.build_initial_field()
    final = reference.build_final_field()
    assert final.time == reference.t_f
    np.testing.assert_array_equal(final.values, initial.values)


def test_time_series_ordering(small_grid):
    series = TimeSeries("abc", SeriesKind.CI_PROBABILITY, small_grid)
    series.add(0.0, np.zeros(small_grid.n), norm=1.0)
    series.add(0.5, np.ones(small_grid.n), norm=1.0)
    with pytest.raises(FieldError):
        series.add(0.5, np.zeros(small_grid.n))
    with pytest.raises(FieldError):
        series.add(1.0, np.zeros(5))
    assert series.times.tolist() == [0.0, 0.5]
    assert series.data_matrix().shape == (2, small_grid.n)
    assert series.observable("norm").tolist() == [1.0, 1.0]
    assert len(series.window(0.25, 1.0)) == 1
