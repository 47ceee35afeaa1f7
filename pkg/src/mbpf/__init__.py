"""Circuit-level analysis and synthesis of CSRR-loaded metamaterial band-pass filters."""
from .circuit import LISTED_CELL, UnitCellParams, n_cell_abcd, sweep, unit_cell_abcd
from .dispersion import (
    closed_form_cutoffs,
    consistency_report,
    dispersion_curve,
    find_band_edges,
    transmission_zero_closed,
    transmission_zero_numeric,
)
from .metrics import REFERENCE_MASK, FilterMetrics, SpecMask, StopbandPoint, compute_metrics, evaluate_mask
from .synthesis import SynthesisConfig, synthesize
from .twoport import FrequencyGrid, SweepTable, TwoPortABCD

__all__ = [
    "LISTED_CELL", "UnitCellParams", "n_cell_abcd", "sweep", "unit_cell_abcd",
    "closed_form_cutoffs", "consistency_report", "dispersion_curve", "find_band_edges",
    "transmission_zero_closed", "transmission_zero_numeric",
    "REFERENCE_MASK", "FilterMetrics", "SpecMask", "StopbandPoint", "compute_metrics", "evaluate_mask",
    "SynthesisConfig", "synthesize",
    "FrequencyGrid", "SweepTable", "TwoPortABCD",
]

__version__ = "0.1.0"
