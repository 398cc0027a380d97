"""
Core model for the 1+1 dimensional free Dirac simulator.

This module owns the discretization (periodic grids with their momentum
modes), two-component spinor fields, physical parameters, the experiment
description (Scenario) and the snapshot containers (TimeSeries) that the
CI and RSI pipelines fill in.
"""
# pylint: disable=invalid-name, trailing-whitespace, line-too-long

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import FieldError, GridError, GridMismatchError, ScenarioError

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

ARTIFACT_VERSION = "1.0.0"

# Reference defaults (natural units)
DEFAULT_X_MIN = -80.0
DEFAULT_X_MAX = 80.0
DEFAULT_GRID_N = 4096
DEFAULT_SIGMA = 2.0
DEFAULT_WEIGHTS = (1.0 + 0.0j, 1.0 + 0.0j)
DEFAULT_T_I = 0.0
DEFAULT_T_F = 40.0
DEFAULT_N_STEPS = 400
DEFAULT_SNAPSHOT_STRIDE = 1

MIN_GRID_POINTS = 8
MIN_POINTS_PER_PACKET = 8    # sites required inside +-3 sigma

TIME_TOLERANCE = 1e-12


class MassTerm(Enum):
    """Matrix multiplying the mass term of the Dirac Hamiltonian."""
    SIGMA_Z = "sigma_z"   # standard 1+1D Dirac mass term (default)
    SIGMA_0 = "sigma_0"   # identity mass term, no zitterbewegung


class RSINormalization(Enum):
    """How the RSI projections are scaled before forming the amplitude density."""
    UNIT = "unit"
    RAW = "raw"


class SeriesKind(Enum):
    """Kind of data recorded in a TimeSeries."""
    CI_PROBABILITY = "CI-probability"
    RSI_AMPLITUDE = "RSI-amplitude"
    RSI_ANTIPARTICLE = "RSI-antiparticle"


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [x_min, x_max) with its matching momentum grid."""
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise GridError(f"Grid size must be an integer, got {self.n!r}")
        if self.n < MIN_GRID_POINTS or not _is_power_of_two(int(self.n)):
            raise GridError(f"Grid size must be a power of two >= {MIN_GRID_POINTS}, got {self.n}")
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise GridError("Grid bounds must be finite")
        if self.x_max <= self.x_min:
            raise GridError(f"Degenerate interval: x_max ({self.x_max}) must exceed x_min ({self.x_min})")

    @property
    def length(self) -> float:
        """Period of the domain."""
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        """Grid spacing."""
        return self.length / self.n

    @property
    def dk(self) -> float:
        """Momentum spacing 2*pi/L."""
        return 2.0 * math.pi / self.length

    @cached_property
    def x(self) -> np.ndarray:
        """Site coordinates x_min + j*dx."""
        return _readonly(self.x_min + self.dx * np.arange(self.n, dtype=float))

    @cached_property
    def mode_numbers(self) -> np.ndarray:
        """Signed mode numbers j in transform order (0, 1, ..., n/2-1, -n/2, ..., -1)."""
        return _readonly(np.rint(np.fft.fftfreq(self.n, d=1.0 / self.n)).astype(np.int64))

    @cached_property
    def k(self) -> np.ndarray:
        """Momentum modes 2*pi*j/L in transform order."""
        return _readonly(self.dk * self.mode_numbers.astype(float))

    @property
    def nyquist_index(self) -> int:
        """Transform-order index of the Nyquist mode j = -n/2."""
        return self.n // 2

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        """Return True if the grid is symmetric about the origin."""
        return abs(self.x_min + self.x_max) <= tol * self.length

    @cached_property
    def mirror_indices(self) -> np.ndarray:
        """Index of the site at -x for every site x (periodic wrap at the seam)."""
        return _readonly((-np.arange(self.n)) % self.n)

    def mode_index(self, k: float, tol: float = 1e-9) -> Optional[int]:
        """Return the transform-order index of momentum k, or None if k is off-grid.

        Args:
            k: Momentum to look up
            tol: Relative tolerance on the mode number

        Returns:
            Index into `k`, or None
        """
        j = k / self.dk
        j_round = int(round(j))
        if abs(j - j_round) > tol * max(1.0, abs(j)):
            return None
        if j_round < -self.n // 2 or j_round > self.n // 2 - 1:
            return None
        return j_round % self.n

    def describe(self) -> Dict[str, Any]:
        """Canonical description used in fingerprints."""
        return {"x_min": float(self.x_min), "x_max": float(self.x_max), "n": int(self.n)}


def make_grid(x_min: float, x_max: float, n: int) -> Grid1D:
    """Build a periodic grid and warm its coordinate and momentum tables.

    Args:
        x_min: Left end of the periodic domain
        x_max: Right end (excluded)
        n: Number of sites, a power of two >= 8

    Returns:
        The grid
    """
    grid = Grid1D(float(x_min), float(x_max), n)
    # populate caches so later shared use is read-only
    _ = grid.x, grid.k, grid.mirror_indices
    logger.debug("Grid [%g, %g) with n=%d, dx=%g", grid.x_min, grid.x_max, grid.n, grid.dx)
    return grid


@dataclass(frozen=True)
class PhysicalParams:
    """Mass, speed of light and reduced Planck constant (natural units by default)."""
    m: float = 1.0
    c: float = 1.0
    hbar: float = 1.0
    mass_term: MassTerm = MassTerm.SIGMA_Z

    def __post_init__(self):
        for name in ("m", "c", "hbar"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ScenarioError(f"Physical parameter {name} must be strictly positive, got {value}")
        if not isinstance(self.mass_term, MassTerm):
            object.__setattr__(self, "mass_term", MassTerm(self.mass_term))

    @property
    def rest_energy(self) -> float:
        """m c^2."""
        return self.m * self.c ** 2

    def describe(self) -> Dict[str, Any]:
        """Canonical description used in fingerprints."""
        return {"m": self.m, "c": self.c, "hbar": self.hbar, "mass_term": self.mass_term.value}


NATURAL_UNITS = PhysicalParams()


@dataclass(frozen=True, eq=False)
class SpinorField:
    """Two-component complex field sampled on a grid at one time stamp.

    `values` has shape (n, 2): column 0 is psi_1, column 1 is psi_2.
    Values are copied and frozen at construction.
    """
    grid: Grid1D
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128, copy=True)
        if values.shape != (self.grid.n, 2):
            raise FieldError(f"Spinor values must have shape ({self.grid.n}, 2), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise FieldError("Spinor values contain NaN or Inf")
        if not math.isfinite(self.time):
            raise FieldError(f"Time stamp must be finite, got {self.time}")
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def zeros(cls, grid: Grid1D, time: float = 0.0) -> "SpinorField":
        """Zero field on a grid."""
        return cls(grid, np.zeros((grid.n, 2), dtype=np.complex128), time)

    @property
    def psi1(self) -> np.ndarray:
        """Upper component."""
        return self.values[:, 0]

    @property
    def psi2(self) -> np.ndarray:
        """Lower component."""
        return self.values[:, 1]

    def with_values(self, values: np.ndarray, time: Optional[float] = None) -> "SpinorField":
        """Return a field on the same grid with new values (and optionally a new stamp)."""
        return SpinorField(self.grid, values, self.time if time is None else time)

    def restamped(self, time: float) -> "SpinorField":
        """Same values, new time stamp."""
        return SpinorField(self.grid, self.values, time)

    def _check_compatible(self, other: "SpinorField") -> None:
        if other.grid != self.grid:
            raise GridMismatchError("Spinor fields live on different grids")

    def __add__(self, other: "SpinorField") -> "SpinorField":
        self._check_compatible(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "SpinorField") -> "SpinorField":
        self._check_compatible(other)
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar: complex) -> "SpinorField":
        return self.with_values(complex(scalar) * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "SpinorField":
        return self.with_values(-self.values)

    def digest(self) -> str:
        """SHA-256 of grid, time stamp and raw values."""
        hasher = hashlib.sha256()
        hasher.update(json.dumps(self.grid.describe(), sort_keys=True).encode("utf-8"))
        hasher.update(repr(self.time).encode("utf-8"))
        hasher.update(np.ascontiguousarray(self.values).tobytes())
        return hasher.hexdigest()


def gaussian_initial_state(grid: Grid1D,
                           sigma: float,
                           weights: Sequence[complex] = DEFAULT_WEIGHTS,
                           center: float = 0.0,
                           momentum: float = 0.0,
                           time: float = 0.0) -> SpinorField:
    """Normalized gaussian spinor with position-density standard deviation sigma.

    Each component is weight_i * (1/(8 pi sigma^2))^(1/4) * exp(-(x-x0)^2/(4 sigma^2))
    * exp(i k0 x), renormalized to unit norm on the grid.

    Args:
        grid: Grid to sample on
        sigma: Standard deviation of the position density
        weights: Complex pair multiplying the two components
        center: Packet center x0
        momentum: Carrier momentum k0
        time: Time stamp of the field

    Returns:
        Unit-norm spinor field
    """
    if not (math.isfinite(sigma) and sigma > 0):
        raise FieldError(f"sigma must be strictly positive, got {sigma}")
    w = np.asarray(weights, dtype=np.complex128)
    if w.shape != (2,):
        raise FieldError(f"weights must be a complex pair, got shape {w.shape}")
    if not np.any(w != 0):
        raise FieldError("weights must not both be zero")

    inside = np.count_nonzero(np.abs(grid.x - center) <= 3.0 * sigma)
    if inside < MIN_POINTS_PER_PACKET:
        raise FieldError(
            f"sigma={sigma} is under-resolved: only {inside} grid points within +-3 sigma "
            f"(need {MIN_POINTS_PER_PACKET})"
        )

    envelope = (1.0 / (8.0 * math.pi * sigma ** 2)) ** 0.25 * np.exp(-(grid.x - center) ** 2 / (4.0 * sigma ** 2))
    carrier = np.exp(1j * momentum * grid.x) if momentum else 1.0
    profile = envelope * carrier
    values = np.stack([w[0] * profile, w[1] * profile], axis=1)

    raw = SpinorField(grid, values, time)
    norm = norm_squared(raw)
    return raw * (1.0 / math.sqrt(norm))


def inner_product(bra: SpinorField, ket: SpinorField) -> complex:
    """Discrete <bra|ket> = sum_sites (bra_1* ket_1 + bra_2* ket_2) dx.

    Args:
        bra: Conjugated field
        ket: Field

    Returns:
        Complex overlap
    """
    if bra.grid != ket.grid:
        raise GridMismatchError("inner_product requires fields on the same grid")
    if abs(bra.time - ket.time) > TIME_TOLERANCE * max(1.0, abs(bra.time)):
        logger.warning("inner_product of fields stamped at different times (%g vs %g)", bra.time, ket.time)
    # numpy pairwise summation: fixed order for a given n
    return complex(np.sum(np.conj(bra.values) * ket.values) * bra.grid.dx)


def norm_squared(f: SpinorField) -> float:
    """Squared L2 norm sum |psi|^2 dx."""
    return float(np.sum(f.values.real ** 2 + f.values.imag ** 2) * f.grid.dx)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Full description of one transition experiment."""
    grid: Grid1D
    params: PhysicalParams = NATURAL_UNITS
    initial_sigma: float = DEFAULT_SIGMA
    spinor_weights: Tuple[complex, complex] = DEFAULT_WEIGHTS
    t_i: float = DEFAULT_T_I
    t_f: float = DEFAULT_T_F
    n_steps: int = DEFAULT_N_STEPS
    snapshot_stride: int = DEFAULT_SNAPSHOT_STRIDE
    final_state: Optional[SpinorField] = None        # None means same-as-initial
    initial_state: Optional[SpinorField] = None      # explicit override, used as given
    rsi_normalization: RSINormalization = RSINormalization.UNIT
    initial_center: float = 0.0
    initial_momentum: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.t_i) and math.isfinite(self.t_f)):
            raise ScenarioError("t_i and t_f must be finite")
        if self.t_f < self.t_i:
            raise ScenarioError(f"t_f ({self.t_f}) must not precede t_i ({self.t_i})")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ScenarioError(f"n_steps must be a positive integer, got {self.n_steps}")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise ScenarioError(f"snapshot_stride must be a positive integer, got {self.snapshot_stride}")
        if self.n_steps % self.snapshot_stride != 0:
            raise ScenarioError(
                f"snapshot_stride ({self.snapshot_stride}) must divide n_steps ({self.n_steps})"
            )
        if not (math.isfinite(self.initial_sigma) and self.initial_sigma > 0):
            raise ScenarioError(f"initial_sigma must be strictly positive, got {self.initial_sigma}")
        weights = tuple(complex(w) for w in self.spinor_weights)
        if len(weights) != 2 or not any(w != 0 for w in weights):
            raise ScenarioError("spinor_weights must be a complex pair, not both zero")
        object.__setattr__(self, "spinor_weights", weights)
        if not isinstance(self.rsi_normalization, RSINormalization):
            object.__setattr__(self, "rsi_normalization", RSINormalization(self.rsi_normalization))
        for label, explicit in (("final_state", self.final_state), ("initial_state", self.initial_state)):
            if explicit is not None and explicit.grid != self.grid:
                raise ScenarioError(f"{label} lives on a different grid than the scenario")

    @property
    def duration(self) -> float:
        """t_f - t_i."""
        return self.t_f - self.t_i

    @property
    def is_degenerate(self) -> bool:
        """True when t_f == t_i (no evolution)."""
        return self.t_f == self.t_i

    @property
    def snapshot_interval(self) -> float:
        """Time between recorded snapshots."""
        return self.duration * self.snapshot_stride / self.n_steps

    def snapshot_times(self) -> np.ndarray:
        """Times at which snapshots are recorded, t_i through t_f inclusive."""
        if self.is_degenerate:
            return np.array([self.t_i])
        count = self.n_steps // self.snapshot_stride
        fractions = np.arange(count + 1) * self.snapshot_stride / self.n_steps
        times = self.t_i + self.duration * fractions
        times[-1] = self.t_f
        return times

    def build_initial_field(self) -> SpinorField:
        """Initial field at t_i."""
        if self.initial_state is not None:
            return self.initial_state.restamped(self.t_i)
        return gaussian_initial_state(
            self.grid, self.initial_sigma, self.spinor_weights,
            center=self.initial_center, momentum=self.initial_momentum, time=self.t_i,
        )

    def build_final_field(self) -> SpinorField:
        """Declared final (measured) field at t_f."""
        if self.final_state is not None:
            return self.final_state.restamped(self.t_f)
        return self.build_initial_field().restamped(self.t_f)

    def describe(self) -> Dict[str, Any]:
        """Canonical JSON-compatible description."""
        return {
            "grid": self.grid.describe(),
            "params": self.params.describe(),
            "initial_sigma": self.initial_sigma,
            "spinor_weights": [[w.real, w.imag] for w in self.spinor_weights],
            "initial_center": self.initial_center,
            "initial_momentum": self.initial_momentum,
            "t_i": self.t_i,
            "t_f": self.t_f,
            "n_steps": int(self.n_steps),
            "snapshot_stride": int(self.snapshot_stride),
            "final_state": "same-as-initial" if self.final_state is None else f"field:{self.final_state.digest()}",
            "initial_state": "gaussian" if self.initial_state is None else f"field:{self.initial_state.digest()}",
            "rsi_normalization": self.rsi_normalization.value,
        }

    def fingerprint(self) -> str:
        """SHA-256 of the canonical description."""
        payload = json.dumps(self.describe(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def with_overrides(self, **changes) -> "Scenario":
        """Copy with fields replaced (validated again)."""
        return replace(self, **changes)


def reference_scenario(**overrides) -> Scenario:
    """Default experiment: sigma = 2 gaussian, weights (1,1), t in [0, 40].

    Args:
        **overrides: Scenario fields to replace; `grid_n` replaces the grid size

    Returns:
        Scenario with reference defaults
    """
    grid_n = overrides.pop("grid_n", DEFAULT_GRID_N)
    grid = overrides.pop("grid", None) or make_grid(DEFAULT_X_MIN, DEFAULT_X_MAX, grid_n)
    return Scenario(grid=grid, **overrides)


@dataclass
class SnapshotRecord:
    """One snapshot: time, density array (real or complex) and scalar observables."""
    time: float
    data: np.ndarray
    observables: Dict[str, Union[float, complex]] = field(default_factory=dict)


@dataclass
class TimeSeries:
    """Ordered snapshots of densities and scalar observables."""
    fingerprint: str
    kind: SeriesKind
    grid: Grid1D
    records: List[SnapshotRecord] = field(default_factory=list)

    def add(self, time: float, data: np.ndarray, **observables) -> SnapshotRecord:
        """Append a snapshot.

        Args:
            time: Snapshot time; must exceed the previous one
            data: Array of length grid.n
            **observables: Scalar observables for this snapshot

        Returns:
            The appended record
        """
        data = np.array(data, copy=True)
        if data.shape != (self.grid.n,):
            raise FieldError(f"Snapshot array must have length {self.grid.n}, got shape {data.shape}")
        if self.records and not time > self.records[-1].time:
            raise FieldError(f"Snapshot times must increase strictly ({time} after {self.records[-1].time})")
        record = SnapshotRecord(float(time), _readonly(data), dict(observables))
        self.records.append(record)
        return record

    def __len__(self) -> int:
        return len(self.records)

    @property
    def is_complex(self) -> bool:
        """True if records hold complex data."""
        return bool(self.records) and np.iscomplexobj(self.records[0].data)

    @property
    def times(self) -> np.ndarray:
        """Record times."""
        return np.array([r.time for r in self.records])

    def data_matrix(self) -> np.ndarray:
        """Records stacked as (len, n)."""
        if not self.records:
            return np.zeros((0, self.grid.n))
        return np.stack([r.data for r in self.records])

    def observable(self, name: str) -> np.ndarray:
        """Values of one scalar observable across records."""
        return np.array([r.observables[name] for r in self.records])

    def window(self, t_start: float, t_end: float) -> "TimeSeries":
        """Sub-series with t_start <= t <= t_end (records are shared, not copied)."""
        tol = TIME_TOLERANCE * max(1.0, abs(t_start), abs(t_end))
        kept = [r for r in self.records if t_start - tol <= r.time <= t_end + tol]
        return TimeSeries(self.fingerprint, self.kind, self.grid, kept)
