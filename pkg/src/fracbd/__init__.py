"""Fractional Yule and fractional death processes.

Simulation of fractional linear-birth (Yule), linear-death, and sublinear
death processes; Mittag-Leffler special-function numerics; and log-regression
point/interval estimation of the fractional order ``nu`` and the intensity,
with a Monte Carlo harness for bias, dispersion, coverage, and width studies.
"""

from .errors import (
    ConditioningError,
    DegenerateSlopeError,
    InsufficientDataError,
    SingularDesignError,
)
from .mittag import MLDistribution, ml, ml_pdf, ml_survival
from .variates import RandomSource, sample_ml, sample_stable
from .processes import (
    ProcessKind,
    ProcessParams,
    SamplePath,
    death_pmf,
    linear_death_mean,
    linear_death_var,
    population_at,
    simulate_linear_death,
    simulate_sublinear_death,
    simulate_yule,
    simulate_yule_horizon,
    step_rows,
    sublinear_death_mean,
    sublinear_death_var,
    yule_mean,
    yule_pmf,
    yule_var,
)
from .estimation import (
    EULER_GAMMA,
    EstimateReport,
    GeneralRateEstimate,
    Interval,
    PointEstimates,
    RateLink,
    RegressionData,
    RegressionFit,
    build_design,
    ci_bootstrap_rate,
    ci_ls,
    ci_res,
    design_from_times,
    estimate_design,
    estimate_general,
    estimate_path,
    ls_fit,
    point_estimates,
    residual_records,
)
from .montecarlo import (
    PAPER_PAIRS,
    PAPER_SIZES,
    CellResult,
    StudyConfig,
    StudyResult,
    interval_study,
    paper_preset,
    point_study,
    study_from_summary_json,
    summarize,
)
from .datasets import InputDataset, Interpretation, load_values, summary_stats

__version__ = "0.1.0"

__all__ = [
    "ConditioningError",
    "DegenerateSlopeError",
    "InsufficientDataError",
    "SingularDesignError",
    "MLDistribution",
    "ml",
    "ml_pdf",
    "ml_survival",
    "RandomSource",
    "sample_ml",
    "sample_stable",
    "ProcessKind",
    "ProcessParams",
    "SamplePath",
    "death_pmf",
    "linear_death_mean",
    "linear_death_var",
    "population_at",
    "simulate_linear_death",
    "simulate_sublinear_death",
    "simulate_yule",
    "simulate_yule_horizon",
    "step_rows",
    "sublinear_death_mean",
    "sublinear_death_var",
    "yule_mean",
    "yule_pmf",
    "yule_var",
    "EULER_GAMMA",
    "EstimateReport",
    "GeneralRateEstimate",
    "Interval",
    "PointEstimates",
    "RateLink",
    "RegressionData",
    "RegressionFit",
    "build_design",
    "ci_bootstrap_rate",
    "ci_ls",
    "ci_res",
    "design_from_times",
    "estimate_design",
    "estimate_general",
    "estimate_path",
    "ls_fit",
    "point_estimates",
    "residual_records",
    "PAPER_PAIRS",
    "PAPER_SIZES",
    "CellResult",
    "StudyConfig",
    "StudyResult",
    "interval_study",
    "paper_preset",
    "point_study",
    "study_from_summary_json",
    "summarize",
    "InputDataset",
    "Interpretation",
    "load_values",
    "summary_stats",
    "__version__",
]
