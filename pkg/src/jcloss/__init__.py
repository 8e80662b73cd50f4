"""Dissipative Jaynes-Cummings dynamics in the dressed-state basis."""

__version__ = "0.1.0"

from .errors import ConvergenceError, CutoffError, DomainError, StepSizeError
from .model import ModelParams, SectorState, TimeSeries, observables

__all__ = [
    "ConvergenceError", "CutoffError", "DomainError", "StepSizeError",
    "ModelParams", "SectorState", "TimeSeries", "observables", "__version__",
]
