"""
Relativistic symmetrical interpretation pipeline.

A retarded field psi (energy-projected initial state, evolved forward) and
an advanced field phi (energy-projected final state, evolved back from t_f)
are carried together; their pointwise overlap phi^dagger psi is the complex
transition amplitude density, whose integral A_s is constant in time.
The negative-energy channel runs the same construction with the lower
projector.
"""
# pylint: disable=invalid-name, trailing-whitespace, line-too-long

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from analysis import mean_position
from core_model import (
    NATURAL_UNITS, TIME_TOLERANCE, PhysicalParams, RSINormalization, Scenario,
    SeriesKind, SpinorField, TimeSeries, inner_product, norm_squared,
)
from errors import FieldError, GridMismatchError, InvariantBreachError, ProjectionError, ScenarioError, report_numerical_issue
from spectral_engine import EnergySign, SpectralPropagator, check_nyquist_weight, local_conservation_residual, project_energy

from .base_pipeline import BasePipeline, ContinuityTracker

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

INVARIANCE_LIMIT = 1e-10
EMPTY_PROJECTION = 1e-24      # relative squared norm treated as zero
SIGNIFICANT_DENSITY = 1e-6    # |rho_s+| floor for the conjugation metric

SignLike = Union[str, EnergySign]


def _projected(source: SpinorField, sign: EnergySign, params: PhysicalParams, label: str) -> SpinorField:
    projected = project_energy(source, sign, params)
    source_norm = norm_squared(source)
    if source_norm == 0.0 or norm_squared(projected) <= EMPTY_PROJECTION * source_norm:
        report_numerical_issue("%s projection onto the %s branch is empty", label, sign.value)
        return SpinorField.zeros(source.grid, source.time)
    return projected


def prepare_retarded(scenario: Scenario, sign: SignLike, params: Optional[PhysicalParams] = None) -> SpinorField:
    """Energy projection of the initial field, stamped t_i, not renormalized.

    Args:
        scenario: Experiment description
        sign: Energy branch
        params: Physical parameters (scenario's when None)

    Returns:
        Projected field; a zero field (with a warning) if the projection is empty
    """
    params = params or scenario.params
    return _projected(scenario.build_initial_field(), EnergySign.from_symbol(sign), params, "Retarded")


class AdvancedProvider:
    """Time-indexed advanced field phi(t) = U(t - t_f) Lambda phi(t_f).

    The Hermitian conjugate phi^dagger(t), returned by `adjoint`, obeys the
    conjugate Dirac equation because phi obeys the Dirac equation.
    """

    def __init__(self, anchor: SpinorField, params: PhysicalParams = NATURAL_UNITS):
        self.anchor = anchor
        self.params = params
        self._propagator = SpectralPropagator(anchor, params)

    @property
    def t_f(self) -> float:
        """Time at which the advanced field is pinned."""
        return self.anchor.time

    def __call__(self, t: float) -> SpinorField:
        return self._propagator.at(t)

    def adjoint(self, t: float) -> np.ndarray:
        """Rows of phi^dagger at time t, shape (n, 2)."""
        return np.conj(self(t).values)

    def norm_squared(self) -> float:
        """Norm of the anchor (equal at every t)."""
        return norm_squared(self.anchor)

    def normalized(self) -> "AdvancedProvider":
        """Provider with the anchor rescaled to unit norm."""
        norm = self.norm_squared()
        if norm == 0.0:
            raise ProjectionError("Cannot normalize an empty advanced field")
        return AdvancedProvider(self.anchor * (1.0 / math.sqrt(norm)), self.params)


def prepare_advanced(scenario: Scenario, sign: SignLike, params: Optional[PhysicalParams] = None) -> AdvancedProvider:
    """Advanced provider built from the energy projection of the final field.

    Args:
        scenario: Experiment description with its final state at t_f
        sign: Energy branch
        params: Physical parameters (scenario's when None)

    Returns:
        AdvancedProvider pinned at t_f
    """
    params = params or scenario.params
    anchor = _projected(scenario.build_final_field(), EnergySign.from_symbol(sign), params, "Advanced")
    return AdvancedProvider(anchor, params)


def _check_pair(phi: SpinorField, psi: SpinorField) -> None:
    if phi.grid != psi.grid:
        raise GridMismatchError("phi and psi live on different grids")
    if abs(phi.time - psi.time) > TIME_TOLERANCE * max(1.0, abs(psi.time)):
        raise FieldError(f"phi (t={phi.time}) and psi (t={psi.time}) are stamped at different times")


def amplitude_density(phi: SpinorField, psi: SpinorField) -> np.ndarray:
    """rho_s = phi_1* psi_1 + phi_2* psi_2 per site (complex)."""
    _check_pair(phi, psi)
    return np.sum(np.conj(phi.values) * psi.values, axis=1)


def amplitude_current(phi: SpinorField, psi: SpinorField, params: PhysicalParams = NATURAL_UNITS) -> np.ndarray:
    """j_s = c (phi_1* psi_2 + phi_2* psi_1) per site (complex)."""
    _check_pair(phi, psi)
    return params.c * (np.conj(phi.psi1) * psi.psi2 + np.conj(phi.psi2) * psi.psi1)


def projected_states(scenario: Scenario,
                     sign: SignLike,
                     params: Optional[PhysicalParams] = None) -> Tuple[SpinorField, SpinorField]:
    """The (psi(t_i), phi(t_f)) pair an RSI run uses, after the normalization policy.

    Args:
        scenario: Experiment description
        sign: Energy branch
        params: Physical parameters (scenario's when None)

    Returns:
        Retarded field at t_i and advanced anchor at t_f
    """
    sign = EnergySign.from_symbol(sign)
    psi = prepare_retarded(scenario, sign, params)
    phi = prepare_advanced(scenario, sign, params).anchor
    for label, projected in (("retarded", psi), ("advanced", phi)):
        if not np.any(projected.values):
            raise ProjectionError(f"The {label} projection onto the {sign.value} branch is empty")
    if scenario.rsi_normalization is RSINormalization.UNIT:
        psi = psi * (1.0 / math.sqrt(norm_squared(psi)))
        phi = phi * (1.0 / math.sqrt(norm_squared(phi)))
    return psi, phi


@dataclass
class RSITransitionResult:
    """Outcome of one RSI channel."""
    amplitude: complex
    probability: float
    series: TimeSeries
    trace: List[Tuple[float, complex]]
    channel: EnergySign
    normalization: RSINormalization = RSINormalization.UNIT
    invariance_drift: float = 0.0
    continuity_residual: Optional[float] = None
    retarded_norm: float = 0.0
    advanced_norm: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """Scalar results as a dictionary."""
        return {
            "channel": self.channel.value,
            "A_s_re": self.amplitude.real,
            "A_s_im": self.amplitude.imag,
            "P_s": self.probability,
            "normalization": self.normalization.value,
            "invariance_drift": self.invariance_drift,
            "continuity_residual": self.continuity_residual,
            "retarded_norm": self.retarded_norm,
            "advanced_norm": self.advanced_norm,
            "snapshots": len(self.series),
        }


class RSIPipeline(BasePipeline):
    """Co-evolution of the retarded and advanced projected fields."""

    def __init__(self, sign: SignLike = EnergySign.PLUS, params: Optional[PhysicalParams] = None, progress: bool = False):
        """Initialize the pipeline for one energy channel.

        Args:
            sign: Energy branch
            params: Physical parameters; the scenario's own are used when None
            progress: Show a tqdm bar over snapshots
        """
        super().__init__(params=params, progress=progress)
        self.sign = EnergySign.from_symbol(sign)

    def run(self, scenario: Scenario) -> RSITransitionResult:
        """Record rho_s and A_s(t) at every snapshot.

        Args:
            scenario: Experiment description

        Returns:
            RSITransitionResult with A_s taken at t_i
        """
        params = self.params_for(scenario)
        psi0, phi_f = projected_states(scenario, self.sign, params)
        check_nyquist_weight(psi0)

        retarded = SpectralPropagator(psi0, params)
        advanced = AdvancedProvider(phi_f, params)
        kind = SeriesKind.RSI_AMPLITUDE if self.sign is EnergySign.PLUS else SeriesKind.RSI_ANTIPARTICLE
        series = TimeSeries(scenario.fingerprint(), kind, scenario.grid)
        tracker = ContinuityTracker(scenario.grid)
        trace: List[Tuple[float, complex]] = []
        worst_boundary, worst_boundary_time = 0.0, scenario.t_i

        for t in self._snapshots(scenario.snapshot_times(), f"RSI{self.sign.value}"):
            psi = retarded.at(t)
            phi = advanced(t)
            rho_s = amplitude_density(phi, psi)
            a_s = complex(np.sum(rho_s) * scenario.grid.dx)
            trace.append((t, a_s))

            boundary = self._boundary_value(rho_s)
            if boundary > worst_boundary:
                worst_boundary, worst_boundary_time = boundary, t
            magnitude = np.abs(rho_s)
            series.add(t, rho_s, amplitude=a_s, abs_mean_position=mean_position(magnitude, scenario.grid), boundary=boundary)
            tracker.push(t, rho_s, amplitude_current(phi, psi, params))

        self._warn_boundary(f"RSI{self.sign.value}", worst_boundary, worst_boundary_time)

        reference = trace[0][1]
        drift = max(abs(a - reference) for _, a in trace)
        if drift > INVARIANCE_LIMIT:
            raise InvariantBreachError(f"RSI amplitude drifted by {drift:.3e} over [{scenario.t_i:g}, {scenario.t_f:g}]")

        result = RSITransitionResult(
            amplitude=reference,
            probability=float((reference.conjugate() * reference).real),
            series=series,
            trace=trace,
            channel=self.sign,
            normalization=scenario.rsi_normalization,
            invariance_drift=drift,
            continuity_residual=tracker.max_residual,
            retarded_norm=norm_squared(psi0),
            advanced_norm=norm_squared(phi_f),
            metadata={"fingerprint": scenario.fingerprint()},
        )
        logger.info("RSI%s: A_s = %.6f%+.6fi, P_s = %.6f (%s projections, drift %.1e)",
                    self.sign.value, reference.real, reference.imag, result.probability,
                    scenario.rsi_normalization.value, drift)
        self._results.append(result)
        return result


def run_rsi(scenario: Scenario,
            sign: SignLike = EnergySign.PLUS,
            params: Optional[PhysicalParams] = None,
            progress: bool = False) -> RSITransitionResult:
    """Run one RSI channel on a scenario."""
    return RSIPipeline(sign, params=params, progress=progress).run(scenario)


def continuity_residual_rsi(series: TimeSeries,
                            phi_fields: Sequence[SpinorField],
                            psi_fields: Sequence[SpinorField],
                            params: PhysicalParams = NATURAL_UNITS) -> float:
    """Max |d(rho_s)/dt + d(j_s)/dx| over interior snapshots of an RSI series."""
    if len(series) < 3:
        raise FieldError(f"Continuity residual needs at least 3 snapshots, got {len(series)}")
    if not len(phi_fields) == len(psi_fields) == len(series):
        raise FieldError("Need one (phi, psi) pair per snapshot")
    currents = np.stack([amplitude_current(phi, psi, params) for phi, psi in zip(phi_fields, psi_fields)])
    return local_conservation_residual(series.times, series.data_matrix(), currents, series.grid)


@dataclass
class AntiparticleReport:
    """Comparison of the positive and negative energy channels."""
    magnitude_mismatch: float
    conjugation_mismatch: float
    trajectory_mismatch: float
    significant_sites: int
    snapshots: int

    def to_dict(self) -> Dict[str, Any]:
        """Report as a dictionary."""
        return {
            "magnitude_mismatch": self.magnitude_mismatch,
            "conjugation_mismatch": self.conjugation_mismatch,
            "trajectory_mismatch": self.trajectory_mismatch,
            "significant_sites": self.significant_sites,
            "snapshots": self.snapshots,
        }


def antiparticle_phase_check(plus: RSITransitionResult, minus: RSITransitionResult) -> AntiparticleReport:
    """Compare |rho_s| and phases of the two channels of one scenario.

    Reports max | |rho_s-| - |rho_s+| |, max |rho_s- - conj(rho_s+)| where
    |rho_s+| > 1e-6, and the largest gap between the mean positions of
    |rho_s+| and |rho_s-| over time.

    Args:
        plus: Positive-energy channel result
        minus: Negative-energy channel result

    Returns:
        AntiparticleReport
    """
    if plus.series.fingerprint != minus.series.fingerprint:
        raise ScenarioError("Channels were run on different scenarios (fingerprint mismatch)")
    if len(plus.series) != len(minus.series) or not np.array_equal(plus.series.times, minus.series.times):
        raise ScenarioError("Channels do not share snapshot times")

    rho_plus = plus.series.data_matrix()
    rho_minus = minus.series.data_matrix()
    magnitude = float(np.max(np.abs(np.abs(rho_minus) - np.abs(rho_plus))))
    significant = np.abs(rho_plus) > SIGNIFICANT_DENSITY
    if np.any(significant):
        conjugation = float(np.max(np.abs(rho_minus - np.conj(rho_plus))[significant]))
    else:
        conjugation = 0.0

    grid = plus.series.grid
    positions_plus = np.array([mean_position(np.abs(row), grid) for row in rho_plus])
    positions_minus = np.array([mean_position(np.abs(row), grid) for row in rho_minus])
    trajectory_gap = float(np.max(np.abs(positions_plus - positions_minus)))

    report = AntiparticleReport(magnitude, conjugation, trajectory_gap, int(np.count_nonzero(significant)), len(plus.series))
    logger.info("Antiparticle check: |rho| mismatch %.2e, conjugation mismatch %.2e, trajectory gap %.2e",
                magnitude, conjugation, trajectory_gap)
    return report
