"""
Base pipeline class that defines the interface for all transition pipelines.
"""
import logging
from abc import ABC, abstractmethod
from collections import deque
from typing import Any, Deque, Iterable, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from core_model import Grid1D, PhysicalParams, Scenario
from errors import report_numerical_issue
from spectral_engine import spectral_derivative

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

BOUNDARY_TOLERANCE = 1e-12


class BasePipeline(ABC):
    """Base class for the CI and RSI pipelines."""

    def __init__(self, params: Optional[PhysicalParams] = None, progress: bool = False):
        """Initialize the base pipeline.

        Args:
            params: Physical parameters; the scenario's own are used when None
            progress: Show a tqdm bar over snapshots
        """
        self._params = params
        self._progress = progress
        self._results: List[Any] = []

    @abstractmethod
    def run(self, scenario: Scenario) -> Any:
        """Run the pipeline on a scenario.

        Args:
            scenario: Experiment description

        Returns:
            The pipeline's transition result
        """
        # pylint: disable=unnecessary-pass
        pass

    def params_for(self, scenario: Scenario) -> PhysicalParams:
        """Physical parameters in effect for `scenario`."""
        return self._params if self._params is not None else scenario.params

    def get_results(self) -> List[Any]:
        """Get all results produced so far.

        Returns:
            List of transition results, in run order
        """
        return self._results

    def clear_results(self) -> None:
        """Clear stored results."""
        self._results = []

    def _snapshots(self, times: np.ndarray, desc: str) -> Iterable[float]:
        """Iterate snapshot times, wrapped in a progress bar when requested."""
        return tqdm(times, desc=desc, unit="snap", disable=not self._progress, leave=False)

    @staticmethod
    def _boundary_value(density: np.ndarray) -> float:
        """Largest |density| at the two edge sites."""
        return float(max(abs(density[0]), abs(density[-1])))

    @staticmethod
    def _warn_boundary(label: str, worst: float, worst_time: float) -> None:
        """Warn once per run if the density reached the domain edge."""
        if worst > BOUNDARY_TOLERANCE:
            report_numerical_issue("%s boundary density %.3e exceeds %.0e (at t=%g); widen the domain",
                                   label, worst, BOUNDARY_TOLERANCE, worst_time)


class ContinuityTracker:
    """Running max of |d(rho)/dt + d(j)/dx| over a stream of snapshots.

    Only the last three snapshots are held in memory.
    """

    def __init__(self, grid: Grid1D):
        self.grid = grid
        self._window: Deque[Tuple[float, np.ndarray, np.ndarray]] = deque(maxlen=3)
        self.max_residual: Optional[float] = None

    def push(self, time: float, density: np.ndarray, current: np.ndarray) -> None:
        """Add one snapshot; updates the residual once three are available."""
        self._window.append((time, density, current))
        if len(self._window) < 3:
            return
        (t0, rho0, _), (_, _, j1), (t2, rho2, _) = self._window
        time_derivative = (rho2 - rho0) / (t2 - t0)
        residual = float(np.max(np.abs(time_derivative + spectral_derivative(j1, self.grid))))
        self.max_residual = residual if self.max_residual is None else max(self.max_residual, residual)
