"""Evaluation protocol: splits, tuning, aggregation, and trend studies."""

from .evaluation import (
    EvalReport,
    Protocol,
    SweepReport,
    UqTrendReport,
    ci_preset,
    fraction_sweep,
    run_evaluation,
    uq_trend_study,
)
from .families import FAMILY_NAMES, build_model
from .reports import (
    comparison_table,
    eval_report_to_dict,
    eval_report_to_json,
    sweep_report_to_csv,
    sweep_report_to_dict,
    sweep_report_to_json,
    uq_report_to_csv,
    uq_report_to_dict,
    uq_report_to_json,
)
from .search import CvResult, HyperGrid, grid_search
from .splits import Fractions, SplitPlan, dual_mc_split, kfold_indices

__all__ = [
    "Fractions", "SplitPlan", "dual_mc_split", "kfold_indices",
    "HyperGrid", "CvResult", "grid_search",
    "Protocol", "ci_preset", "EvalReport", "SweepReport", "UqTrendReport",
    "run_evaluation", "fraction_sweep", "uq_trend_study",
    "FAMILY_NAMES", "build_model",
    "comparison_table",
    "eval_report_to_dict", "eval_report_to_json",
    "sweep_report_to_dict", "sweep_report_to_json", "sweep_report_to_csv",
    "uq_report_to_dict", "uq_report_to_json", "uq_report_to_csv",
]
