"""Quantitative recurrence for hyperbolic automorphisms of the 2-torus.

Subpackages: :mod:`exact_core` (exact arithmetic), :mod:`periodic_points`,
:mod:`recurrence_geometry`, :mod:`dimension_lab` and the :mod:`cli`.
"""

from .errors import (
    CapExceeded,
    DegenerateLayer,
    DegenerateParallelogram,
    EmptySlice,
    IllConditionedFit,
    NotHyperbolic,
    NotUnimodular,
    SelfEnergyDiverges,
    TorusRecurError,
    ZeroB,
)
from .exact_core import IntMatrix2, QuadraticReal, SpectralData, prepare, spectral_analyze
from .recurrence_geometry import RecurrenceConfig

__version__ = "0.1.0"

__all__ = [
    "CapExceeded",
    "DegenerateLayer",
    "DegenerateParallelogram",
    "EmptySlice",
    "IllConditionedFit",
    "IntMatrix2",
    "NotHyperbolic",
    "NotUnimodular",
    "QuadraticReal",
    "RecurrenceConfig",
    "SelfEnergyDiverges",
    "SpectralData",
    "TorusRecurError",
    "ZeroB",
    "prepare",
    "spectral_analyze",
]
