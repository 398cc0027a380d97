"""
Independent validation oracle for the spectral engine.

A Crank-Nicolson integrator with a finite-difference Hamiltonian on the
periodic grid, closed-form plane-wave solutions, and substitution
residuals of the Dirac equation and of its Hermitian conjugate.
"""
# pylint: disable=invalid-name, trailing-whitespace, line-too-long

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from core_model import NATURAL_UNITS, Grid1D, MassTerm, PhysicalParams, Scenario, SpinorField, norm_squared
from errors import FieldError, InvariantBreachError, ScenarioError
from spectral_engine import (
    SIGMA_X, SIGMA_Z, EnergySign, branch_energies, propagate, spectral_derivative,
)

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

SMALL_INSTANCE_N = 512
SMALL_INSTANCE_DURATION = 5.0
STENCIL_ORDERS = (2, 4)
TIME_STENCIL_STEP = 1e-3


@dataclass(frozen=True)
class FDConfig:
    """Finite-difference oracle settings."""
    dt: float
    stencil_order: int = 4
    boundary: str = "periodic"
    max_courant: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ScenarioError(f"FDConfig.dt must be positive, got {self.dt}")
        if self.stencil_order not in STENCIL_ORDERS:
            raise ScenarioError(f"stencil_order must be one of {STENCIL_ORDERS}, got {self.stencil_order}")
        if self.boundary != "periodic":
            raise ScenarioError(f"Only periodic boundaries are supported, got {self.boundary!r}")
        if not self.max_courant > 0:
            raise ScenarioError("max_courant must be positive")

    def courant(self, grid: Grid1D, params: PhysicalParams = NATURAL_UNITS) -> float:
        """c dt / dx."""
        return params.c * self.dt / grid.dx

    def check(self, grid: Grid1D, params: PhysicalParams = NATURAL_UNITS) -> None:
        """Reject a step beyond the configured stability margin."""
        courant = self.courant(grid, params)
        if courant > self.max_courant:
            raise ScenarioError(f"c*dt/dx = {courant:.3g} exceeds the margin {self.max_courant:g}")

    def halved(self, times: int = 1) -> "FDConfig":
        """Same settings with dt divided by 2**times."""
        return FDConfig(self.dt / 2 ** times, self.stencil_order, self.boundary, self.max_courant)


def derivative_matrix(grid: Grid1D, order: int = 4) -> sp.csc_matrix:
    """Periodic centered first-derivative matrix of order 2 or 4."""
    n = grid.n
    shift_up = sp.diags([np.ones(n - 1), np.ones(1)], [1, -(n - 1)], shape=(n, n), format="csc")  # psi_{j+1}
    shift_down = shift_up.T.tocsc()
    if order == 2:
        return ((shift_up - shift_down) / (2.0 * grid.dx)).tocsc()
    return ((-(shift_up @ shift_up) + 8.0 * shift_up - 8.0 * shift_down + shift_down @ shift_down)
            / (12.0 * grid.dx)).tocsc()


def fd_hamiltonian(grid: Grid1D, params: PhysicalParams = NATURAL_UNITS, order: int = 4) -> sp.csc_matrix:
    """Finite-difference Hamiltonian on the stacked vector [psi_1; psi_2]."""
    momentum = -1j * params.hbar * params.c * derivative_matrix(grid, order)
    mass = SIGMA_Z if params.mass_term is MassTerm.SIGMA_Z else np.eye(2)
    identity = sp.identity(grid.n, format="csc")
    return (sp.kron(SIGMA_X, momentum) + sp.kron(mass, params.rest_energy * identity)).tocsc()


def _stack(field: SpinorField) -> np.ndarray:
    return field.values.T.reshape(-1)


def _unstack(vector: np.ndarray, grid: Grid1D) -> np.ndarray:
    return vector.reshape(2, grid.n).T


class CrankNicolsonIntegrator:
    """(I + i dt H/2hbar) psi_{n+1} = (I - i dt H/2hbar) psi_n with a sparse LU solve."""

    def __init__(self, grid: Grid1D, params: PhysicalParams, cfg: FDConfig):
        self.grid = grid
        self.params = params
        self.cfg = cfg
        hamiltonian = fd_hamiltonian(grid, params, cfg.stencil_order)
        half = 0.5j * cfg.dt / params.hbar
        identity = sp.identity(2 * grid.n, dtype=np.complex128, format="csc")
        self._explicit = (identity - half * hamiltonian).tocsr()
        try:
            self._lu = splu((identity + half * hamiltonian).tocsc())
        except RuntimeError as e:
            raise InvariantBreachError(f"Crank-Nicolson matrix could not be factorized: {e}") from e
        logger.debug("CN factorization for n=%d, dt=%g, order %d", grid.n, cfg.dt, cfg.stencil_order)

    def step_vector(self, vector: np.ndarray) -> np.ndarray:
        """One step on a stacked vector."""
        return self._lu.solve(self._explicit @ vector)

    def evolve(self, field: SpinorField, steps: int) -> SpinorField:
        """Apply `steps` steps to a field."""
        vector = _stack(field)
        for _ in range(steps):
            vector = self.step_vector(vector)
        if not np.all(np.isfinite(vector)):
            raise InvariantBreachError("Crank-Nicolson solve produced non-finite values")
        return SpinorField(self.grid, _unstack(vector, self.grid), field.time + steps * self.cfg.dt)


@lru_cache(maxsize=16)
def _integrator_for(grid: Grid1D, params: PhysicalParams, cfg: FDConfig) -> CrankNicolsonIntegrator:
    return CrankNicolsonIntegrator(grid, params, cfg)


def cn_step(field: SpinorField, cfg: FDConfig, params: PhysicalParams = NATURAL_UNITS) -> SpinorField:
    """One Crank-Nicolson step of the finite-difference Dirac equation.

    Args:
        field: Field at time t
        cfg: Oracle settings
        params: Physical parameters

    Returns:
        Field at t + dt
    """
    cfg.check(field.grid, params)
    return _integrator_for(field.grid, params, cfg).evolve(field, 1)


def _step_count(duration: float, dt: float) -> int:
    steps = duration / dt
    rounded = int(round(steps))
    if abs(steps - rounded) > 1e-9 * max(1.0, steps):
        raise ScenarioError(f"Duration {duration} is not a whole number of steps dt={dt}")
    return rounded


def cn_evolve(field: SpinorField, duration: float, cfg: FDConfig, params: PhysicalParams = NATURAL_UNITS) -> SpinorField:
    """Crank-Nicolson evolution over a whole number of steps."""
    cfg.check(field.grid, params)
    return _integrator_for(field.grid, params, cfg).evolve(field, _step_count(duration, cfg.dt))


def discrete_wavenumber(k: Union[float, np.ndarray], dx: float, order: int = 4) -> Union[float, np.ndarray]:
    """Symbol of the centered difference: the effective k it differentiates with."""
    if order == 2:
        return np.sin(k * dx) / dx
    return (8.0 * np.sin(k * dx) - np.sin(2.0 * k * dx)) / (6.0 * dx)


def cn_amplification(k: float, sign: Union[str, EnergySign], cfg: FDConfig, grid: Grid1D,
                     params: PhysicalParams = NATURAL_UNITS) -> complex:
    """Closed-form CN factor (1 - i l dt/2hbar)/(1 + i l dt/2hbar) for a plane wave.

    `l` is the branch energy of the finite-difference Hamiltonian at k.
    """
    upper, lower = branch_energies(discrete_wavenumber(k, grid.dx, cfg.stencil_order), params)
    energy = float(upper if EnergySign.from_symbol(sign) is EnergySign.PLUS else lower)
    half = 0.5j * energy * cfg.dt / params.hbar
    return complex((1.0 - half) / (1.0 + half))


def _order(coarse: Optional[float], fine: Optional[float]) -> Optional[float]:
    if not coarse or not fine:
        return None
    return math.log2(coarse / fine)


@dataclass
class OracleReport:
    """Gaps between CN and spectral solutions for a ladder of time steps."""
    dts: List[float]
    linf_errors: List[float]
    l2_errors: List[float]
    orders: List[Optional[float]]
    self_orders: List[Optional[float]] = field(default_factory=list)
    stencil_order: int = 4
    n: int = 0
    duration: float = 0.0

    @property
    def observed_order(self) -> Optional[float]:
        """Order from the finest pair of dt values."""
        return self.orders[-1] if self.orders else None

    @property
    def self_convergence_order(self) -> Optional[float]:
        """Order estimated from successive CN solutions only."""
        return self.self_orders[-1] if self.self_orders else None

    def to_dict(self) -> Dict[str, Any]:
        """Report as a dictionary."""
        return {
            "dts": self.dts,
            "linf_errors": self.linf_errors,
            "l2_errors": self.l2_errors,
            "orders": self.orders,
            "observed_order": self.observed_order,
            "self_orders": self.self_orders,
            "self_convergence_order": self.self_convergence_order,
            "stencil_order": self.stencil_order,
            "n": self.n,
            "duration": self.duration,
        }


def validate_against_spectral(scenario: Scenario, cfg: FDConfig, halvings: int = 2,
                              params: Optional[PhysicalParams] = None) -> OracleReport:
    """Compare CN and spectral solutions at t_f for dt, dt/2, ... dt/2**halvings.

    Args:
        scenario: Small instance (n <= 512, t_f - t_i <= 5 recommended)
        cfg: Oracle settings for the coarsest step
        halvings: Number of dt halvings
        params: Physical parameters (scenario's when None)

    Returns:
        OracleReport with L-infinity and L2 gaps and observed orders
    """
    params = params or scenario.params
    if scenario.grid.n > SMALL_INSTANCE_N or scenario.duration > SMALL_INSTANCE_DURATION:
        logger.warning("Oracle instance n=%d, duration=%g is beyond the desk-scale size (n<=%d, duration<=%g)",
                       scenario.grid.n, scenario.duration, SMALL_INSTANCE_N, SMALL_INSTANCE_DURATION)

    initial = scenario.build_initial_field()
    exact = propagate(initial, scenario.duration, params)
    configs = [cfg.halved(i) for i in range(halvings + 1)]
    solutions = [cn_evolve(initial, scenario.duration, c, params) for c in configs]

    linf, l2 = [], []
    for solution in solutions:
        gap = solution - exact
        linf.append(float(np.max(np.abs(gap.values))))
        l2.append(math.sqrt(norm_squared(gap)))
    orders = [_order(linf[i], linf[i + 1]) for i in range(len(linf) - 1)]

    increments = [float(np.max(np.abs((solutions[i + 1] - solutions[i]).values))) for i in range(len(solutions) - 1)]
    self_orders = [_order(increments[i], increments[i + 1]) for i in range(len(increments) - 1)]

    report = OracleReport([c.dt for c in configs], linf, l2, orders, self_orders,
                          cfg.stencil_order, scenario.grid.n, scenario.duration)
    logger.info("Oracle: L-inf gaps %s, observed order %s",
                ", ".join(f"{e:.2e}" for e in linf), report.observed_order)
    return report


def plane_wave_solution(k: float, sign: Union[str, EnergySign], t: float, grid: Grid1D,
                        params: PhysicalParams = NATURAL_UNITS) -> SpinorField:
    """Exact plane-wave solution u(k) exp(i k x) exp(-i lambda t/hbar).

    u(k) is the unit eigenspinor of H(k) on the chosen branch and lambda its
    eigenvalue; each site carries unit amplitude.

    Args:
        k: On-grid momentum
        sign: Energy branch
        t: Time stamp
        grid: Grid
        params: Physical parameters

    Returns:
        SpinorField at time t
    """
    if grid.mode_index(k) is None:
        raise FieldError(f"k={k} is not a momentum mode of the grid (spacing {grid.dk:g})")
    sign = EnergySign.from_symbol(sign)
    ax = params.hbar * params.c * k
    az = params.rest_energy if params.mass_term is MassTerm.SIGMA_Z else 0.0
    radius = math.hypot(ax, az)
    if radius == 0.0:
        spinor = np.array([1.0, sign.factor]) / math.sqrt(2.0)
    elif sign is EnergySign.PLUS:
        spinor = np.array([radius + az, ax])
    else:
        spinor = np.array([-ax, radius + az])
    spinor = spinor / np.linalg.norm(spinor)
    upper, lower = branch_energies(k, params)
    energy = float(upper if sign is EnergySign.PLUS else lower)
    wave = np.exp(1j * k * grid.x) * np.exp(-1j * energy * t / params.hbar)
    return SpinorField(grid, np.outer(wave, spinor), t)


def _time_derivative(values_at: Callable[[float], np.ndarray], t: float, h: float) -> np.ndarray:
    """Fourth-order centered difference in time."""
    return (-values_at(t + 2 * h) + 8.0 * values_at(t + h) - 8.0 * values_at(t - h) + values_at(t - 2 * h)) / (12.0 * h)


def dirac_residual(field_at: Callable[[float], SpinorField], t: float, h: float = TIME_STENCIL_STEP,
                   params: PhysicalParams = NATURAL_UNITS) -> float:
    """max |(1/c) d_t psi + sigma_x d_x psi + i (mc/hbar) M psi| at time t.

    M is sigma_z (or I for the sigma_0 reading).

    Args:
        field_at: Callable returning the solution at a given time
        t: Evaluation time
        h: Time-stencil step
        params: Physical parameters

    Returns:
        Largest residual over sites and components
    """
    psi = field_at(t)
    dt_psi = _time_derivative(lambda s: field_at(s).values, t, h)
    dx_psi = spectral_derivative(psi.values, psi.grid)
    mass = psi.values * (np.array([1.0, -1.0]) if params.mass_term is MassTerm.SIGMA_Z else 1.0)
    residual = dt_psi / params.c + dx_psi[:, ::-1] + 1j * (params.m * params.c / params.hbar) * mass
    return float(np.max(np.abs(residual)))


def adjoint_dirac_residual(adjoint_at: Callable[[float], np.ndarray], grid: Grid1D, t: float,
                           h: float = TIME_STENCIL_STEP, params: PhysicalParams = NATURAL_UNITS) -> float:
    """max |(1/c) d_t phi^+ + d_x phi^+ sigma_x - i (mc/hbar) phi^+ M| at time t.

    Args:
        adjoint_at: Callable returning the rows of phi^dagger, shape (n, 2)
        grid: Grid the rows live on
        t: Evaluation time
        h: Time-stencil step
        params: Physical parameters

    Returns:
        Largest residual over sites and components
    """
    rows = adjoint_at(t)
    dt_rows = _time_derivative(adjoint_at, t, h)
    dx_rows = spectral_derivative(rows, grid)
    mass = rows * (np.array([1.0, -1.0]) if params.mass_term is MassTerm.SIGMA_Z else 1.0)
    residual = dt_rows / params.c + dx_rows[:, ::-1] - 1j * (params.m * params.c / params.hbar) * mass
    return float(np.max(np.abs(residual)))
