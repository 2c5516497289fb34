"""Report serialization: JSON for machines, CSV tables for humans."""

from __future__ import annotations

import io
import json

from .evaluation import EvalReport, SweepReport, UqTrendReport

COMPARISON_HEADER = ("family,average_rmse_mm,maximum_rmse_mm,minimum_rmse_mm,"
                     "stddev_mm,prediction_range_mm")


def _fmt(value: float) -> str:
    return format(value, ".10g")


def eval_report_to_dict(report: EvalReport) -> dict:
    return {
        "family": report.family,
        "average_rmse_mm": report.average,
        "maximum_rmse_mm": report.maximum,
        "minimum_rmse_mm": report.minimum,
        "stddev_mm": report.stddev,
        "prediction_range_mm": report.prediction_range,
        "iteration_ids": list(report.iteration_ids),
        "test_rmses_mm": list(report.test_rmses),
        "train_rmses_mm": list(report.train_rmses),
        "chosen_params": list(report.chosen_params),
        "failures": [list(f) for f in report.failures],
        "best_iteration": report.best_iteration,
        "diagnostics": list(report.diagnostics),
        "provenance": report.provenance,
    }


def eval_report_to_json(report: EvalReport) -> str:
    return json.dumps(eval_report_to_dict(report), indent=2, sort_keys=True) + "\n"


def comparison_table(reports: list[EvalReport]) -> str:
    out = io.StringIO()
    out.write(COMPARISON_HEADER + "\n")
    for report in reports:
        out.write(",".join([
            report.family,
            _fmt(report.average), _fmt(report.maximum), _fmt(report.minimum),
            _fmt(report.stddev), _fmt(report.prediction_range),
        ]) + "\n")
    return out.getvalue()


def sweep_report_to_dict(report: SweepReport) -> dict:
    return {
        "family": report.family,
        "fractions": list(report.fractions),
        "rows": [dict(row) for row in report.rows],
        "reports": [eval_report_to_dict(r) for r in report.reports],
    }


def sweep_report_to_json(report: SweepReport) -> str:
    return json.dumps(sweep_report_to_dict(report), indent=2, sort_keys=True) + "\n"


def sweep_report_to_csv(report: SweepReport) -> str:
    out = io.StringIO()
    out.write("fraction,mean_test_rmse_mm,std_test_rmse_mm,"
              "mean_train_rmse_mm,std_train_rmse_mm,n_iterations,n_failures\n")
    for row in report.rows:
        out.write(",".join([
            _fmt(row["fraction"]),
            _fmt(row["mean_test_rmse"]), _fmt(row["std_test_rmse"]),
            _fmt(row["mean_train_rmse"]), _fmt(row["std_train_rmse"]),
            str(row["n_iterations"]), str(row["n_failures"]),
        ]) + "\n")
    return out.getvalue()


def uq_report_to_dict(report: UqTrendReport) -> dict:
    return {
        "fractions": list(report.fractions),
        "seeds": list(report.seeds),
        "n_draws": report.n_draws,
        "rows": [dict(row) for row in report.rows],
    }


def uq_report_to_json(report: UqTrendReport) -> str:
    return json.dumps(uq_report_to_dict(report), indent=2, sort_keys=True) + "\n"


def uq_report_to_csv(report: UqTrendReport) -> str:
    out = io.StringIO()
    out.write("fraction,mean_aleatoric_mm,std_aleatoric_mm,"
              "mean_epistemic_mm,std_epistemic_mm,mean_test_rmse_mm,std_test_rmse_mm\n")
    for row in report.rows:
        out.write(",".join([
            _fmt(row["fraction"]),
            _fmt(row["mean_aleatoric"]), _fmt(row["std_aleatoric"]),
            _fmt(row["mean_epistemic"]), _fmt(row["std_epistemic"]),
            _fmt(row["mean_test_rmse"]), _fmt(row["std_test_rmse"]),
        ]) + "\n")
    return out.getvalue()
