"""Evaluation harness: factorial designs, error metrics and importance reports."""

from biasnet.experiment.design import FactorialDesign
from biasnet.experiment.importance import ImportanceReport, importance_report
from biasnet.experiment.report import (
    importance_svg,
    metrics_table,
    posterior_svg,
    posterior_table,
    print_report,
    write_importance_svgs,
    write_report,
)
from biasnet.experiment.runner import (
    DesignSample,
    EvalReport,
    ParameterMetrics,
    evaluate,
    run_design,
    simulate_design,
)

__all__ = [
    "DesignSample",
    "EvalReport",
    "FactorialDesign",
    "ImportanceReport",
    "ParameterMetrics",
    "evaluate",
    "importance_report",
    "importance_svg",
    "metrics_table",
    "posterior_svg",
    "posterior_table",
    "print_report",
    "run_design",
    "simulate_design",
    "write_importance_svgs",
    "write_report",
]
