"""Tests for the conventional-interpretation pipeline."""
import cmath
import math

import numpy as np
import pytest

from conftest import REFERENCE_A, REFERENCE_P, REFERENCE_TOLERANCE
from core_model import Scenario, SeriesKind, SpinorField, TimeSeries, gaussian_initial_state, make_grid
from errors import FieldError, NumericalWarning
from oracle import plane_wave_solution
from pipelines.ci_pipeline import CIPipeline, continuity_residual_ci, probability_current, probability_density, run_ci
from spectral_engine import SpectralPropagator


def test_probability_density_examples(reference):
    field = reference.build_initial_field()
    rho = probability_density(field)
    assert np.max(rho) == pytest.approx(1.0 / math.sqrt(8.0 * math.pi), rel=1e-12)
    assert np.sum(rho) * reference.grid.dx == pytest.approx(1.0, abs=1e-12)
    assert np.all(probability_density(SpinorField.zeros(reference.grid)) == 0.0)


def test_probability_current_examples(reference):
    field = reference.build_initial_field()
    np.testing.assert_allclose(probability_current(field), probability_density(field), atol=1e-15)
    upper_only = SpinorField(reference.grid, np.stack([field.psi1, np.zeros(reference.grid.n)], axis=1))
    assert np.all(probability_current(upper_only) == 0.0)
    rotated = SpinorField(reference.grid, np.stack([field.psi1, 1j * field.psi1], axis=1))
    np.testing.assert_allclose(probability_current(rotated), 0.0, atol=1e-15)


def test_reference_amplitude_and_probability(reference_ci, exact_return_amplitude):
    assert reference_ci.amplitude.real == pytest.approx(REFERENCE_A.real, abs=REFERENCE_TOLERANCE)
    assert reference_ci.amplitude.imag == pytest.approx(REFERENCE_A.imag, abs=REFERENCE_TOLERANCE)
    assert reference_ci.probability == pytest.approx(REFERENCE_P, abs=REFERENCE_TOLERANCE)
    # exact value for the continuum problem
    assert reference_ci.amplitude.real == pytest.approx(exact_return_amplitude.real, abs=1e-8)
    assert reference_ci.probability == pytest.approx(exact_return_amplitude.real ** 2, abs=1e-8)
    assert reference_ci.probability == pytest.approx(abs(reference_ci.amplitude) ** 2, abs=1e-14)


def test_norm_conserved_at_every_snapshot(reference_ci):
    norms = reference_ci.series.observable("norm")
    assert len(norms) == 401
    assert np.max(np.abs(norms - 1.0)) <= 1e-12
    assert reference_ci.norm_drift <= 1e-12
    assert reference_ci.series.kind is SeriesKind.CI_PROBABILITY


def test_collapse_is_a_discontinuity(reference_ci):
    collapse = reference_ci.collapse
    assert collapse.time == 40.0
    assert collapse.pre_collapse.time == collapse.post_collapse.time == 40.0
    assert collapse.discontinuity > 0.1


def test_degenerate_scenario_gives_unit_amplitude(small_grid):
    scenario = Scenario(grid=small_grid, initial_sigma=1.0, t_i=2.0, t_f=2.0)
    result = run_ci(scenario)
    assert result.amplitude == pytest.approx(1.0, abs=1e-12)
    assert result.probability == pytest.approx(1.0, abs=1e-12)
    assert result.continuity_residual is None
    assert len(result.series) == 1


def test_probability_is_phase_invariant():
    grid = make_grid(-40, 40, 1024)
    base = Scenario(grid=grid, t_f=10.0, n_steps=10)
    alpha = 0.731
    rotated = base.with_overrides(final_state=base.build_final_field() * cmath.exp(1j * alpha))
    a, b = run_ci(base), run_ci(rotated)
    assert b.probability == pytest.approx(a.probability, abs=1e-14)
    assert cmath.phase(a.amplitude / b.amplitude) == pytest.approx(alpha, abs=1e-12)


def test_current_bounded_by_density(reference):
    field = SpectralPropagator(reference.build_initial_field()).at(20.0)
    assert np.all(np.abs(probability_current(field)) <= probability_density(field) + 1e-15)


def _window_residual(scenario, center, h):
    propagator = SpectralPropagator(scenario.build_initial_field())
    times = [center - h, center, center + h]
    fields = [propagator.at(t) for t in times]
    series = TimeSeries(scenario.fingerprint(), SeriesKind.CI_PROBABILITY, scenario.grid)
    for t, field in zip(times, fields):
        series.add(t, probability_density(field))
    return continuity_residual_ci(series, fields)


def test_continuity_residual_is_second_order(reference):
    residuals = [_window_residual(reference, 1.0, h) for h in (0.02, 0.01, 0.005)]
    orders = [math.log2(residuals[i] / residuals[i + 1]) for i in range(2)]
    for order in orders:
        assert order == pytest.approx(2.0, abs=0.2)


def test_continuity_residual_stationary_and_zero(small_grid):
    rest = [plane_wave_solution(0.0, "+", t, small_grid) for t in (0.0, 0.01, 0.02)]
    series = TimeSeries("rest", SeriesKind.CI_PROBABILITY, small_grid)
    for field in rest:
        series.add(field.time, probability_density(field))
    assert continuity_residual_ci(series, rest) <= 1e-10

    zeros = [SpinorField.zeros(small_grid, t) for t in (0.0, 0.1, 0.2)]
    series = TimeSeries("zero", SeriesKind.CI_PROBABILITY, small_grid)
    for field in zeros:
        series.add(field.time, probability_density(field))
    assert continuity_residual_ci(series, zeros) == 0.0


def test_continuity_residual_needs_three_snapshots(small_grid):
    series = TimeSeries("x", SeriesKind.CI_PROBABILITY, small_grid)
    series.add(0.0, np.zeros(small_grid.n))
    with pytest.raises(FieldError):
        continuity_residual_ci(series, [SpinorField.zeros(small_grid)])


def test_run_residual_reported(reference_ci):
    # 0.1 cadence over the whole run
    assert reference_ci.continuity_residual is not None
    assert 0.0 < reference_ci.continuity_residual < 5e-2


def test_boundary_density_warns():
    grid = make_grid(-8, 8, 256)
    scenario = Scenario(grid=grid, t_f=2.0, n_steps=20)
    with pytest.warns(NumericalWarning, match="boundary"):
        run_ci(scenario)


def test_pipeline_keeps_results(small_grid):
    pipeline = CIPipeline()
    scenario = Scenario(grid=small_grid, initial_sigma=1.0, t_f=1.0, n_steps=10)
    pipeline.run(scenario)
    pipeline.run(scenario)
    assert len(pipeline.get_results()) == 2
    pipeline.clear_results()
    assert pipeline.get_results() == []


def test_explicit_initial_state_is_used_as_given(small_grid):
    initial = 2.0 * gaussian_initial_state(small_grid, 1.0)
    scenario = Scenario(grid=small_grid, t_f=1.0, n_steps=10, initial_state=initial)
    result = run_ci(scenario)
    assert result.series.observable("norm")[0] == pytest.approx(4.0, abs=1e-12)
