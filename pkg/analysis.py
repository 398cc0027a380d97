"""
Observables and discriminators for CI and RSI runs.

Mean position, drift removal, zitterbewegung amplitude and frequency,
spatial symmetry metrics and the group-velocity drift oracle.
"""
# pylint: disable=invalid-name, trailing-whitespace, line-too-long

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import signal

from core_model import NATURAL_UNITS, Grid1D, PhysicalParams, SnapshotRecord, SpinorField, TimeSeries
from errors import FieldError, GridError
from spectral_engine import dispersion_energy, to_momentum

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

MIN_TRAJECTORY_SNAPSHOTS = 16
ZITTER_WINDOW = 2.0 * math.pi      # first cycle of the CI oscillation and then some
SPACING_TOLERANCE = 1e-9


@dataclass
class TrajectoryReport:
    """Mean-position trajectory with its drift fit and residual oscillation."""
    times: List[float]
    raw: List[float]
    velocity: float
    detrended: List[float]
    amplitude: float
    frequency: float
    resolution: float
    detrend_order: int = 1
    coefficients: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        """Scalar summary (arrays omitted)."""
        return {
            "velocity": self.velocity,
            "amplitude": self.amplitude,
            "frequency": self.frequency,
            "resolution": self.resolution,
            "detrend_order": self.detrend_order,
            "samples": len(self.times),
        }


def mean_position(density: np.ndarray, grid: Grid1D) -> float:
    """First moment sum(x d dx) / sum(d dx) of a non-negative density.

    Args:
        density: Site values, length grid.n
        grid: Grid the density lives on

    Returns:
        Mean position
    """
    density = np.asarray(density, dtype=float)
    if density.shape != (grid.n,):
        raise FieldError(f"Density must have length {grid.n}, got shape {density.shape}")
    total = float(np.sum(density))
    if total == 0.0:
        raise FieldError("mean_position of a density with zero total weight")
    return float(np.sum(grid.x * density) / total)


def _record_position(record: SnapshotRecord, grid: Grid1D, use_abs: bool) -> float:
    data = np.abs(record.data) if use_abs else record.data
    return mean_position(data, grid)


def trajectory(series: TimeSeries,
               use_abs: bool = False,
               window: Optional[Tuple[float, float]] = None,
               detrend_order: int = 1) -> TrajectoryReport:
    """Mean-position trajectory, drift fit and dominant residual oscillation.

    The drift is removed by a least-squares polynomial in time (a line by
    default); the slope at the window center is reported as the drift
    velocity. Amplitude is half the peak-to-peak of the residual, frequency
    the peak of its Hann-windowed periodogram (DC excluded), in radians per
    unit time.

    Args:
        series: Density snapshots (complex records need use_abs)
        use_abs: Take |density| before the first moment
        window: (t_start, t_end); defaults to [t_first, t_first + 2 pi]
        detrend_order: Degree of the drift polynomial

    Returns:
        TrajectoryReport over the window
    """
    if series.is_complex and not use_abs:
        raise FieldError("Complex amplitude densities require use_abs=True")
    if detrend_order < 1:
        raise FieldError(f"detrend_order must be >= 1, got {detrend_order}")
    if series.records:
        start = series.records[0].time
        t_start, t_end = window if window is not None else (start, start + ZITTER_WINDOW)
        series = series.window(t_start, t_end)
    if len(series) < MIN_TRAJECTORY_SNAPSHOTS:
        raise FieldError(f"trajectory needs at least {MIN_TRAJECTORY_SNAPSHOTS} snapshots, got {len(series)}")

    times = series.times
    steps = np.diff(times)
    dt = float(np.mean(steps))
    if np.max(np.abs(steps - dt)) > SPACING_TOLERANCE * max(1.0, abs(dt)):
        raise FieldError("trajectory needs uniformly spaced snapshots")

    positions = np.array([_record_position(r, series.grid, use_abs) for r in series.records])

    # fit on centered time so relabeling t -> t + c leaves the residual unchanged
    tau = times - 0.5 * (times[0] + times[-1])
    coefficients = np.polynomial.polynomial.polyfit(tau, positions, detrend_order)
    drift = np.polynomial.polynomial.polyval(tau, coefficients)
    residual = positions - drift
    velocity = float(coefficients[1])

    amplitude = 0.5 * float(np.max(residual) - np.min(residual))
    freqs, power = signal.periodogram(residual, fs=1.0 / dt, window="hann", detrend=False, scaling="spectrum")
    resolution = 2.0 * math.pi * float(freqs[1]) if freqs.size > 1 else 0.0
    if amplitude == 0.0 or freqs.size < 2 or not np.any(power[1:] > 0):
        frequency = 0.0
    else:
        frequency = 2.0 * math.pi * float(freqs[1 + int(np.argmax(power[1:]))])

    logger.debug("Trajectory over [%g, %g]: v=%.6g amplitude=%.3e omega=%.4g",
                 times[0], times[-1], velocity, amplitude, frequency)
    return TrajectoryReport(
        times=times.tolist(),
        raw=positions.tolist(),
        velocity=velocity,
        detrended=residual.tolist(),
        amplitude=amplitude,
        frequency=frequency,
        resolution=resolution,
        detrend_order=detrend_order,
        coefficients=coefficients.tolist(),
    )


def asymmetry_metric(density: np.ndarray, grid: Grid1D) -> float:
    """max|d(x) - d(-x)| / max|d(x)| on a grid symmetric about the origin.

    Site x_j is mirrored to the site with index (-j) mod n, so the x_min
    site maps onto itself through the periodic seam.

    Args:
        density: Real or complex site values
        grid: Grid symmetric about 0

    Returns:
        Relative asymmetry, 0 for an even function (and for a zero density)
    """
    if not grid.is_symmetric():
        raise GridError("asymmetry_metric needs a grid symmetric about the origin")
    density = np.asarray(density)
    if density.shape != (grid.n,):
        raise FieldError(f"Density must have length {grid.n}, got shape {density.shape}")
    scale = float(np.max(np.abs(density)))
    if scale == 0.0:
        return 0.0
    mirrored = density[grid.mirror_indices]
    return float(np.max(np.abs(density - mirrored))) / scale


def asymmetry_metrics(density: np.ndarray, grid: Grid1D) -> Dict[str, float]:
    """Asymmetry of the values and of their absolute values."""
    return {
        "complex": asymmetry_metric(density, grid),
        "absolute": asymmetry_metric(np.abs(density), grid),
    }


def group_velocity(field: SpinorField, params: PhysicalParams = NATURAL_UNITS, sign: int = 1) -> float:
    """Average of dE/d(hbar k) = sign c^2 hbar k / E over the momentum density.

    Predicts the drift of a packet carried by the branch `sign` (+1 or -1).
    """
    coefficients = to_momentum(field).values
    weights = np.sum(np.abs(coefficients) ** 2, axis=1)
    total = float(np.sum(weights))
    if total == 0.0:
        raise FieldError("group_velocity of a zero field")
    k = field.grid.k
    speeds = sign * params.c ** 2 * params.hbar * k / dispersion_energy(k, params)
    return float(np.sum(weights * speeds) / total)


def snapshot_at(series: TimeSeries, t: float, tol: float = 1e-9) -> SnapshotRecord:
    """Record whose time is within `tol` of t."""
    for record in series.records:
        if abs(record.time - t) <= tol * max(1.0, abs(t)):
            return record
    raise FieldError(f"No snapshot at t={t} (cadence {series.times[:2].tolist() if len(series) else []})")
