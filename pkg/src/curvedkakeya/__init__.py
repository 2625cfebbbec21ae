"""Curved Kakeya sets from tangency-forcing translations.

The main entry points are re-exported here; see the submodules for details.
"""
__version__ = "0.1.0"

from .construction import (ConstructionPlan, CurvedRect, StageSet, TranslationTable, binary_floor,
                           build_stage, build_translation_table)
from .errors import (ConfigError, DataError, DomainError, FamilyError, KakeyaError, OrderingError,
                     SizeError, SolverError, WindowError)
from .family import CurveFamily, ValidationReport, preset, validate_family
from .iteration import IterationPlan, build_iterated, nesting_check
from .kernels import BACKEND
from .maximal import (APPENDIX_POINTS, MaximalEstimate, WitnessSet, exponent_fit, r_delta_indicator,
                      ratio_lower_bound)
from .measure import (MeasureReport, SliceProfile, group_thickness, measure_stage, merge_intervals,
                      slice)
from .render import render_svg
from .tangency import TangencySolution, solve_tangency, verify_dominance

__all__ = [
    "APPENDIX_POINTS", "BACKEND", "ConfigError", "ConstructionPlan", "CurveFamily", "CurvedRect",
    "DataError", "DomainError", "FamilyError", "IterationPlan", "KakeyaError", "MaximalEstimate",
    "MeasureReport", "OrderingError", "SizeError", "SliceProfile", "SolverError", "StageSet",
    "TangencySolution", "TranslationTable", "ValidationReport", "WindowError", "WitnessSet",
    "binary_floor", "build_iterated", "build_stage", "build_translation_table", "exponent_fit",
    "group_thickness", "measure_stage", "merge_intervals", "nesting_check", "preset",
    "r_delta_indicator", "ratio_lower_bound", "render_svg", "slice", "solve_tangency",
    "validate_family", "verify_dominance",
]
