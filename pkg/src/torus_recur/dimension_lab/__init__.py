"""Dimension formula, covering sums, box counting and energy certificates."""

from .boxcount import BoxCountResult, LayerCounts, boxcount_estimate, layer_box_counts
from .disintegration import DisintegrationReport, disintegration_bound
from .energy import EnergyResult, interval_energy, pair_integral, riesz_energy_1d, riesz_energy_2d
from .formula import CoveringTerms, DimFormula, covering_upper_counts, dim_curve, dim_formula
from .uniformity import BallSpec, MeasureCheck, measure_uniformity

__all__ = [
    "BallSpec",
    "BoxCountResult",
    "CoveringTerms",
    "DimFormula",
    "DisintegrationReport",
    "EnergyResult",
    "LayerCounts",
    "MeasureCheck",
    "boxcount_estimate",
    "covering_upper_counts",
    "dim_curve",
    "dim_formula",
    "disintegration_bound",
    "interval_energy",
    "layer_box_counts",
    "measure_uniformity",
    "pair_integral",
    "riesz_energy_1d",
    "riesz_energy_2d",
]
