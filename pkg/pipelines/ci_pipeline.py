"""
Conventional interpretation pipeline.

The full wavefunction (both energy branches) evolves forward from t_i; the
transition amplitude is its overlap with the declared final state at t_f,
where the evolved field is replaced by that state.
"""
# pylint: disable=invalid-name, trailing-whitespace, line-too-long

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np

from analysis import mean_position
from core_model import NATURAL_UNITS, PhysicalParams, Scenario, SeriesKind, SpinorField, TimeSeries, inner_product, norm_squared
from errors import FieldError, InvariantBreachError
from spectral_engine import SpectralPropagator, check_nyquist_weight, local_conservation_residual

from .base_pipeline import BasePipeline, ContinuityTracker

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

NORM_DRIFT_LIMIT = 1e-10


def probability_density(field: SpinorField) -> np.ndarray:
    """rho = |psi_1|^2 + |psi_2|^2 per site."""
    values = field.values
    return np.sum(values.real ** 2 + values.imag ** 2, axis=1)


def probability_current(field: SpinorField, params: PhysicalParams = NATURAL_UNITS) -> np.ndarray:
    """j = c (psi_1* psi_2 + psi_2* psi_1) = 2 c Re(psi_1* psi_2) per site."""
    return 2.0 * params.c * np.real(np.conj(field.psi1) * field.psi2)


@dataclass
class CollapseRecord:
    """Replacement of the evolved field by the measured state at t_f."""
    time: float
    pre_collapse: SpinorField
    post_collapse: SpinorField

    @property
    def discontinuity(self) -> float:
        """Norm of pre minus post."""
        return float(np.sqrt(norm_squared(self.pre_collapse - self.post_collapse)))


@dataclass
class CITransitionResult:
    """Outcome of a CI run."""
    amplitude: complex
    probability: float
    series: TimeSeries
    collapse: CollapseRecord
    norm_drift: float = 0.0
    continuity_residual: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        """Scalar results as a dictionary."""
        return {
            "A_re": self.amplitude.real,
            "A_im": self.amplitude.imag,
            "P": self.probability,
            "norm_drift": self.norm_drift,
            "continuity_residual": self.continuity_residual,
            "collapse_discontinuity": self.collapse.discontinuity,
            "snapshots": len(self.series),
        }


class CIPipeline(BasePipeline):
    """Retarded evolution of the full wavefunction with collapse at t_f."""

    def run(self, scenario: Scenario) -> CITransitionResult:
        """Evolve, record rho snapshots, and form A and P.

        Args:
            scenario: Experiment description

        Returns:
            CITransitionResult
        """
        params = self.params_for(scenario)
        initial = scenario.build_initial_field()
        final = scenario.build_final_field()
        check_nyquist_weight(initial)

        propagator = SpectralPropagator(initial, params)
        series = TimeSeries(scenario.fingerprint(), SeriesKind.CI_PROBABILITY, scenario.grid)
        tracker = ContinuityTracker(scenario.grid)
        reference_norm = norm_squared(initial)
        worst_drift, worst_boundary, worst_boundary_time = 0.0, 0.0, scenario.t_i
        evolved = initial

        for t in self._snapshots(scenario.snapshot_times(), "CI"):
            evolved = propagator.at(t)
            rho = probability_density(evolved)
            norm = float(np.sum(rho) * scenario.grid.dx)
            drift = abs(norm - reference_norm)
            if drift > NORM_DRIFT_LIMIT:
                raise InvariantBreachError(f"CI norm drifted by {drift:.3e} at t={t:g}")
            worst_drift = max(worst_drift, drift)

            boundary = self._boundary_value(rho)
            if boundary > worst_boundary:
                worst_boundary, worst_boundary_time = boundary, t

            series.add(t, rho, norm=norm, mean_position=mean_position(rho, scenario.grid), boundary=boundary)
            tracker.push(t, rho, probability_current(evolved, params))

        self._warn_boundary("CI", worst_boundary, worst_boundary_time)

        # collapse: overlap taken exactly at t_f
        amplitude = inner_product(final, evolved)
        probability = float((amplitude.conjugate() * amplitude).real)
        result = CITransitionResult(
            amplitude=amplitude,
            probability=probability,
            series=series,
            collapse=CollapseRecord(scenario.t_f, evolved, final),
            norm_drift=worst_drift,
            continuity_residual=tracker.max_residual,
        )
        logger.info("CI: A = %.6f%+.6fi, P = %.6f over %d snapshots",
                    amplitude.real, amplitude.imag, probability, len(series))
        self._results.append(result)
        return result


def run_ci(scenario: Scenario, params: Optional[PhysicalParams] = None, progress: bool = False) -> CITransitionResult:
    """Run the CI pipeline on one scenario."""
    return CIPipeline(params=params, progress=progress).run(scenario)


def continuity_residual_ci(series: TimeSeries,
                           fields: Sequence[SpinorField],
                           params: PhysicalParams = NATURAL_UNITS) -> float:
    """Max |d(rho)/dt + d(j)/dx| over interior snapshots of a CI series.

    Args:
        series: CI-probability snapshots, uniformly spaced, at least 3
        fields: The evolved fields behind each snapshot, same order
        params: Physical parameters (c enters the current)

    Returns:
        Maximum residual
    """
    if len(series) < 3:
        raise FieldError(f"Continuity residual needs at least 3 snapshots, got {len(series)}")
    if len(fields) != len(series):
        raise FieldError(f"Got {len(fields)} fields for {len(series)} snapshots")
    currents = np.stack([probability_current(f, params) for f in fields])
    return local_conservation_residual(series.times, series.data_matrix(), currents, series.grid)
