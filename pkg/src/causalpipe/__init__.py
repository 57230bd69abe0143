"""causalpipe: interventional effect estimation on tabular cohort data.

Separates observational prediction from causal estimation: identify
through a user-supplied DAG (back-door criterion), estimate average and
heterogeneous effects with several triangulating estimators, stress-test
with permutation and placebo refutations, and quantify how far naive
observational contrasts drift from the adjusted causal answer.
"""

__version__ = "0.1.0"

from .dag import (
    BackdoorVerdict,
    Dag,
    Implication,
    d_separated,
    descendants,
    is_valid_backdoor,
    load_dag,
    parse_dag,
    render_dag,
    testable_implications,
)
from .dataset import Table, complete_cases, impute_iterative, load_table, mcar_test, summarize_baseline
from .boosting import BoostedTreeRegressor, BoostParams, fit_gbm
from .regress import (
    FitResult,
    PartialCorrelation,
    logistic_fit,
    ols_fit,
    partial_correlation,
    predict_proba,
    tail_probability,
)

__all__ = [
    "__version__",
    "BackdoorVerdict",
    "BoostParams",
    "BoostedTreeRegressor",
    "Dag",
    "FitResult",
    "Implication",
    "PartialCorrelation",
    "Table",
    "complete_cases",
    "d_separated",
    "descendants",
    "fit_gbm",
    "impute_iterative",
    "is_valid_backdoor",
    "load_dag",
    "load_table",
    "logistic_fit",
    "mcar_test",
    "ols_fit",
    "parse_dag",
    "partial_correlation",
    "predict_proba",
    "render_dag",
    "summarize_baseline",
    "tail_probability",
    "testable_implications",
]
