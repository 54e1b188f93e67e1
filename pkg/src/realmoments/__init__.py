"""Entanglement detection from realignment moments."""

__version__ = "0.1.0"

from .criteria import AnalysisReport, CriterionVerdict, Verdict, run_all
from .moments import MomentVector, centered_moments, pt_moments, realignment_moments
from .reshape import BipartiteDims, partial_trace, partial_transpose, realign, vec
from .states import DensityMatrix, bell_state, parse_state, random_density, random_separable, serialize_state, werner

__all__ = [
    "AnalysisReport",
    "BipartiteDims",
    "CriterionVerdict",
    "DensityMatrix",
    "MomentVector",
    "Verdict",
    "bell_state",
    "centered_moments",
    "parse_state",
    "partial_trace",
    "partial_transpose",
    "pt_moments",
    "random_density",
    "random_separable",
    "realign",
    "realignment_moments",
    "run_all",
    "serialize_state",
    "vec",
    "werner",
]
