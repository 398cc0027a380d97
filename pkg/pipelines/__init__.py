"""
Transition pipelines: the conventional (CI) and symmetrical (RSI) readings.
"""
from .base_pipeline import BasePipeline
from .ci_pipeline import CIPipeline, CITransitionResult, run_ci
from .rsi_pipeline import RSIPipeline, RSITransitionResult, run_rsi

__all__ = [
    "BasePipeline",
    "CIPipeline",
    "CITransitionResult",
    "RSIPipeline",
    "RSITransitionResult",
    "run_ci",
    "run_rsi",
]
