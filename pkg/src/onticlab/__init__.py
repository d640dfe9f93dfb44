"""Finite ontological models, interferometer scenarios and the non-overlap argument."""

__version__ = "0.1.0"

from .numerics import DEFAULT_TOL, Tolerances
from .scenario import Event, Measurement, QuantumScenario, ZeroStructure, evaluate, zero_structure

__all__ = [
    "DEFAULT_TOL",
    "Event",
    "Measurement",
    "QuantumScenario",
    "Tolerances",
    "ZeroStructure",
    "__version__",
    "evaluate",
    "zero_structure",
]
