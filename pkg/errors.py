"""
Exception hierarchy and numerical warning plumbing for the Dirac simulator.
"""
# pylint: disable=trailing-whitespace

import logging
import warnings
from typing import Optional

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


class DiracSimError(Exception):
    """Base class for all simulator errors."""


class GridError(DiracSimError, ValueError):
    """Invalid grid construction (non power of two, degenerate interval, ...)."""


class GridMismatchError(DiracSimError, ValueError):
    """Two fields that must share a grid do not."""


class FieldError(DiracSimError, ValueError):
    """Invalid spinor field values or time stamps."""


class ScenarioError(DiracSimError, ValueError):
    """Scenario invariants violated."""


class ConfigError(ScenarioError):
    """Scenario file could not be parsed or validated."""

    def __init__(self, message: str, path: Optional[str] = None,
                 line: Optional[int] = None):
        """Initialize the config error.

        Args:
            message: Description of the problem
            path: Config file path, if known
            line: 1-based line number of the offending entry, if known
        """
        self.path = path
        self.line = line
        location = ""
        if path and line:
            location = f"{path}:{line}: "
        elif path:
            location = f"{path}: "
        super().__init__(f"{location}{message}")


class ProjectionError(DiracSimError, ValueError):
    """An energy projection produced an all-zero field where one is required."""


class InvariantBreachError(DiracSimError, RuntimeError):
    """A numerical invariant (norm, amplitude invariance, ...) was violated."""


class OutputError(DiracSimError, OSError):
    """Figure data or manifest could not be written."""


class NumericalWarning(UserWarning):
    """Soft numerical problem; escalated to an error under --strict."""


def report_numerical_issue(message: str, *args) -> None:
    """Log a numerical problem and issue it as a NumericalWarning.

    Args:
        message: %-style message
        *args: Arguments for the message
    """
    logger.warning(message, *args)
    warnings.warn(message % args if args else message, NumericalWarning, stacklevel=3)
