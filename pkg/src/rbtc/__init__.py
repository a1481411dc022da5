"""Record-based transmuted Chen (RBTC) lifetime distribution.

Evaluation, Lambert-W quantiles, three samplers, nine point estimators,
goodness-of-fit statistics, rival models and a reproducible Monte Carlo
study harness.
"""

from .data import DataSample
from .distribution import (
    RbtcParams,
    cdf,
    hazard,
    isf,
    log_pdf,
    log_survival,
    median,
    moment_series,
    pdf,
    quantile,
    raw_moment,
    survival,
)
from .estimation import EstimatorKind, FitResult, fit, standard_errors
from .gof import GofReport, gof_report
from .sampling import RngStream, sample

__version__ = "0.1.0"

__all__ = [
    "DataSample",
    "RbtcParams",
    "cdf",
    "pdf",
    "log_pdf",
    "survival",
    "log_survival",
    "hazard",
    "quantile",
    "isf",
    "median",
    "raw_moment",
    "moment_series",
    "EstimatorKind",
    "FitResult",
    "fit",
    "standard_errors",
    "GofReport",
    "gof_report",
    "RngStream",
    "sample",
]
