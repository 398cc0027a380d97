"""
Momentum-space machinery for the free Dirac equation in 1+1 dimensions.

Fields are moved to momentum space with a unitary DFT, where the free
Hamiltonian is a 2x2 matrix per mode. Propagation and energy projection
are exact per-mode matrix products evaluated in closed form.
"""
# pylint: disable=invalid-name, trailing-whitespace, line-too-long

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Tuple, Union

import numpy as np
from scipy import fft as sp_fft

from core_model import NATURAL_UNITS, Grid1D, MassTerm, PhysicalParams, SpinorField
from errors import FieldError, GridMismatchError, report_numerical_issue

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

NYQUIST_TOLERANCE = 1e-12

SIGMA_0 = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

ArrayLike = Union[float, np.ndarray]


class ModeLabel(Enum):
    """What a ModeMatrix table represents."""
    HAMILTONIAN = "hamiltonian"
    PROPAGATOR = "propagator"
    PROJECTOR_PLUS = "projector(+)"
    PROJECTOR_MINUS = "projector(-)"


class EnergySign(Enum):
    """Energy branch selector."""
    PLUS = "+"
    MINUS = "-"

    @property
    def factor(self) -> int:
        """+1 or -1."""
        return 1 if self is EnergySign.PLUS else -1

    @classmethod
    def from_symbol(cls, symbol: Union[str, "EnergySign"]) -> "EnergySign":
        """Accept '+', '-', 'plus', 'minus' or an EnergySign."""
        if isinstance(symbol, EnergySign):
            return symbol
        text = str(symbol).strip().lower()
        if text in ("+", "plus", "positive"):
            return cls.PLUS
        if text in ("-", "minus", "negative"):
            return cls.MINUS
        raise ValueError(f"Unknown energy sign: {symbol!r}")


@dataclass(frozen=True, eq=False)
class MomentumField:
    """Spinor coefficients indexed by momentum mode (transform order)."""
    grid: Grid1D
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128, copy=True)
        if values.shape != (self.grid.n, 2):
            raise FieldError(f"Momentum values must have shape ({self.grid.n}, 2), got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "time", float(self.time))

    def norm_squared(self) -> float:
        """Sum of |coefficients|^2 (equals the position-space norm)."""
        return float(np.sum(np.abs(self.values) ** 2))


@dataclass(frozen=True, eq=False)
class ModeMatrix:
    """Table of one 2x2 complex matrix per momentum mode."""
    grid: Grid1D
    table: np.ndarray
    label: ModeLabel
    dt: Optional[float] = None

    def __post_init__(self):
        table = np.array(self.table, dtype=np.complex128, copy=True)
        if table.shape != (self.grid.n, 2, 2):
            raise FieldError(f"Mode table must have shape ({self.grid.n}, 2, 2), got {table.shape}")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def apply(self, mfield: MomentumField) -> MomentumField:
        """Multiply every mode of `mfield` by its matrix."""
        if mfield.grid != self.grid:
            raise GridMismatchError("ModeMatrix and MomentumField live on different grids")
        return MomentumField(self.grid, np.einsum("kij,kj->ki", self.table, mfield.values), mfield.time)


def to_momentum(field: SpinorField) -> MomentumField:
    """Unitary DFT of both spinor components."""
    return MomentumField(field.grid, sp_fft.fft(field.values, axis=0, norm="ortho"), field.time)


def to_position(mfield: MomentumField) -> SpinorField:
    """Inverse unitary DFT of both spinor components."""
    return SpinorField(mfield.grid, sp_fft.ifft(mfield.values, axis=0, norm="ortho"), mfield.time)


def dispersion_energy(k: ArrayLike, params: PhysicalParams = NATURAL_UNITS) -> ArrayLike:
    """E(k) = sqrt((hbar c k)^2 + (m c^2)^2)."""
    return np.hypot(params.hbar * params.c * np.asarray(k, dtype=float), params.rest_energy)


def _pauli_components(k: ArrayLike, params: PhysicalParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coefficients (a0, ax, az) with H(k) = a0 I + ax sigma_x + az sigma_z."""
    k = np.asarray(k, dtype=float)
    ax = params.hbar * params.c * k
    mass = np.full_like(ax, params.rest_energy)
    if params.mass_term is MassTerm.SIGMA_Z:
        return np.zeros_like(ax), ax, mass
    return mass, ax, np.zeros_like(ax)


def _assemble(c0: np.ndarray, cx: np.ndarray, cz: np.ndarray) -> np.ndarray:
    """Stack c0 I + cx sigma_x + cz sigma_z into (..., 2, 2)."""
    return (np.multiply.outer(c0, SIGMA_0)
            + np.multiply.outer(cx, SIGMA_X)
            + np.multiply.outer(cz, SIGMA_Z))


def hamiltonian_matrix(k: ArrayLike, params: PhysicalParams = NATURAL_UNITS) -> np.ndarray:
    """Free Dirac Hamiltonian H(k) = hbar c k sigma_x + m c^2 sigma_z.

    With the sigma_0 mass-term reading, H(k) = hbar c k sigma_x + m c^2 I.

    Args:
        k: Momentum (scalar or array)
        params: Physical parameters

    Returns:
        (2, 2) matrix, or (len(k), 2, 2) for array input
    """
    a0, ax, az = _pauli_components(k, params)
    return _assemble(a0.astype(complex), ax.astype(complex), az.astype(complex))


def branch_energies(k: ArrayLike, params: PhysicalParams = NATURAL_UNITS) -> Tuple[ArrayLike, ArrayLike]:
    """Upper and lower eigenvalues of H(k)."""
    a0, ax, az = _pauli_components(k, params)
    radius = np.hypot(ax, az)
    return a0 + radius, a0 - radius


def propagator_matrix(k: ArrayLike, dt: float, params: PhysicalParams = NATURAL_UNITS) -> np.ndarray:
    """Exact one-mode evolution operator exp(-i H(k) dt / hbar).

    For the sigma_z Hamiltonian this is cos(theta) I - i sin(theta) H/E with
    theta = E dt / hbar. The general closed form used here also covers the
    sigma_0 reading and the |a| = 0 mode.

    Args:
        k: Momentum (scalar or array)
        dt: Time step (negative allowed)
        params: Physical parameters

    Returns:
        Unitary (2, 2) matrix, or a (len(k), 2, 2) table
    """
    a0, ax, az = _pauli_components(k, params)
    radius = np.hypot(ax, az)
    tau = dt / params.hbar
    cos_part = np.cos(radius * tau)
    # sin(|a| tau)/|a| written through sinc so |a| = 0 is regular
    sin_over_radius = tau * np.sinc(radius * tau / np.pi)
    phase = np.exp(-1j * a0 * tau)
    return _assemble(phase * cos_part, -1j * phase * sin_over_radius * ax, -1j * phase * sin_over_radius * az)


def projector_matrix(k: ArrayLike, sign: Union[str, EnergySign], params: PhysicalParams = NATURAL_UNITS) -> np.ndarray:
    """Energy projector (I +- a.sigma/|a|)/2 onto the upper or lower branch.

    For the sigma_z Hamiltonian a.sigma/|a| = H/E. With the sigma_0 reading
    the k = 0 mode is degenerate and sigma_x is used as its axis.

    Args:
        k: Momentum (scalar or array)
        sign: Branch, '+' or '-'
        params: Physical parameters

    Returns:
        Hermitian idempotent (2, 2) matrix or table
    """
    s = EnergySign.from_symbol(sign).factor
    _, ax, az = _pauli_components(k, params)
    radius = np.hypot(ax, az)
    degenerate = radius == 0
    safe = np.where(degenerate, 1.0, radius)
    nx = np.where(degenerate, 1.0, ax / safe)
    nz = np.where(degenerate, 0.0, az / safe)
    half = np.full_like(nx, 0.5)
    return _assemble(half.astype(complex), (0.5 * s * nx).astype(complex), (0.5 * s * nz).astype(complex))


@lru_cache(maxsize=32)
def hamiltonian_table(grid: Grid1D, params: PhysicalParams = NATURAL_UNITS) -> ModeMatrix:
    """Cached Hamiltonian over all grid modes."""
    return ModeMatrix(grid, hamiltonian_matrix(grid.k, params), ModeLabel.HAMILTONIAN)


@lru_cache(maxsize=64)
def propagator_table(grid: Grid1D, dt: float, params: PhysicalParams = NATURAL_UNITS) -> ModeMatrix:
    """Cached propagator over all grid modes for one time step."""
    return ModeMatrix(grid, propagator_matrix(grid.k, dt, params), ModeLabel.PROPAGATOR, dt=dt)


@lru_cache(maxsize=32)
def projector_table(grid: Grid1D, sign: EnergySign, params: PhysicalParams = NATURAL_UNITS) -> ModeMatrix:
    """Cached energy projector over all grid modes."""
    label = ModeLabel.PROJECTOR_PLUS if sign is EnergySign.PLUS else ModeLabel.PROJECTOR_MINUS
    return ModeMatrix(grid, projector_matrix(grid.k, sign, params), label)


def propagate(field: SpinorField, dt: float, params: PhysicalParams = NATURAL_UNITS) -> SpinorField:
    """Evolve a field by dt with the exact spectral propagator.

    Args:
        field: Field at time t
        dt: Time step; negative evolves backward
        params: Physical parameters

    Returns:
        Field stamped t + dt
    """
    if dt == 0:
        return field
    evolved = propagator_table(field.grid, float(dt), params).apply(to_momentum(field))
    return to_position(MomentumField(field.grid, evolved.values, field.time + dt))


def project_energy(field: SpinorField, sign: Union[str, EnergySign], params: PhysicalParams = NATURAL_UNITS) -> SpinorField:
    """Positive or negative energy part of a field (not renormalized)."""
    table = projector_table(field.grid, EnergySign.from_symbol(sign), params)
    return to_position(table.apply(to_momentum(field)))


def apply_hamiltonian(field: SpinorField, params: PhysicalParams = NATURAL_UNITS) -> SpinorField:
    """H applied to a field, computed mode by mode."""
    return to_position(hamiltonian_table(field.grid, params).apply(to_momentum(field)))


class SpectralPropagator:
    """Evaluates one field at arbitrary times from a single forward transform.

    Each time is reached directly from the reference stamp, so repeated
    evaluation does not accumulate stepping error.
    """

    def __init__(self, field: SpinorField, params: PhysicalParams = NATURAL_UNITS):
        self.grid = field.grid
        self.params = params
        self.reference_time = field.time
        self._reference = field
        self._coefficients = to_momentum(field).values

    def at(self, t: float) -> SpinorField:
        """Field at time t."""
        dt = t - self.reference_time
        if dt == 0:
            return self._reference.restamped(t)
        table = propagator_matrix(self.grid.k, dt, self.params)
        values = sp_fft.ifft(np.einsum("kij,kj->ki", table, self._coefficients), axis=0, norm="ortho")
        return SpinorField(self.grid, values, t)

    def iter_times(self, times: Iterable[float]) -> Iterator[SpinorField]:
        """Yield the field at each of `times`."""
        for t in times:
            yield self.at(float(t))


def spectral_derivative(values: np.ndarray, grid: Grid1D) -> np.ndarray:
    """d/dx of site values (axis 0) by multiplication with i k.

    The Nyquist mode is dropped for this odd-order derivative.
    """
    values = np.asarray(values)
    ik = 1j * grid.k.copy()
    ik[grid.nyquist_index] = 0.0
    if values.ndim > 1:
        ik = ik.reshape((-1,) + (1,) * (values.ndim - 1))
    derivative = sp_fft.ifft(ik * sp_fft.fft(values, axis=0), axis=0)
    if np.isrealobj(values):
        return derivative.real
    return derivative


def nyquist_weight(field: SpinorField) -> float:
    """Fraction of the field's norm carried by the Nyquist mode."""
    coefficients = to_momentum(field).values
    total = float(np.sum(np.abs(coefficients) ** 2))
    if total == 0.0:
        return 0.0
    return float(np.sum(np.abs(coefficients[field.grid.nyquist_index]) ** 2)) / total


def check_nyquist_weight(field: SpinorField, tolerance: float = NYQUIST_TOLERANCE) -> float:
    """Return the Nyquist weight, warning if it exceeds `tolerance`."""
    weight = nyquist_weight(field)
    if weight > tolerance:
        report_numerical_issue("Nyquist-mode weight %.3e exceeds %.1e at t=%g; grid is under-resolved",
                               weight, tolerance, field.time)
    return weight


def local_conservation_residual(times: np.ndarray,
                                densities: np.ndarray,
                                currents: np.ndarray,
                                grid: Grid1D) -> float:
    """Max residual of d(rho)/dt + d(j)/dx over interior snapshots.

    The time derivative is a centered difference of neighbouring snapshots;
    the space derivative is spectral.

    Args:
        times: Snapshot times, uniformly spaced
        densities: (len(times), n) density values (real or complex)
        currents: (len(times), n) current values
        grid: Grid the values live on

    Returns:
        Maximum absolute residual
    """
    times = np.asarray(times, dtype=float)
    densities = np.asarray(densities)
    currents = np.asarray(currents)
    if times.size < 3:
        raise FieldError(f"Continuity residual needs at least 3 snapshots, got {times.size}")
    if densities.shape != (times.size, grid.n) or currents.shape != densities.shape:
        raise FieldError("Density and current arrays must have shape (len(times), n)")
    steps = np.diff(times)
    dt = steps[0]
    if dt <= 0 or np.max(np.abs(steps - dt)) > 1e-9 * abs(dt):
        raise FieldError("Continuity residual needs uniformly spaced snapshots")

    time_derivative = (densities[2:] - densities[:-2]) / (2.0 * dt)
    space_derivative = spectral_derivative(currents[1:-1].T, grid).T
    return float(np.max(np.abs(time_derivative + space_derivative)))
