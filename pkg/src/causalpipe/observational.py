"""The observational prediction baseline the causal estimates are compared against.

A plain multivariable logistic model of the outcome on all predictors,
scored by AUROC / average precision / Brier under stratified K-fold
cross-validation. Its odds ratios are associations, never effects; the
pipeline reports them next to the causal numbers to make the
prediction-versus-intervention gap visible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .ranktests import midranks
from .regress import _Z975, logistic_fit, predict_proba, tail_probability


@dataclass(frozen=True)
class OddsRatio:
    predictor: str
    odds_ratio: float
    ci_low: float
    ci_high: float
    p_value: float


@dataclass(frozen=True)
class ObservationalResult:
    auroc: float
    cv_auroc_mean: float
    cv_auroc_sd: float
    average_precision: float
    brier: float
    odds_ratios: tuple


def auroc(y, scores):
    """Area under the ROC curve, computed from midranks (ties averaged)."""
    y = np.asarray(y, dtype=np.float64)
    scores = np.asarray(scores, dtype=np.float64)
    n1 = int(np.sum(y == 1.0))
    n0 = int(np.sum(y == 0.0))
    if n1 == 0 or n0 == 0:
        raise ValidationError("need both classes to compute AUROC")
    ranks = midranks(scores)
    u = ranks[y == 1.0].sum() - n1 * (n1 + 1) / 2.0
    return float(u / (n1 * n0))


def average_precision(y, scores):
    """Area under the precision-recall curve by the step-function sum."""
    y = np.asarray(y, dtype=np.float64)
    scores = np.asarray(scores, dtype=np.float64)
    n1 = np.sum(y == 1.0)
    if n1 == 0:
        raise ValidationError("need at least one positive to compute average precision")
    order = np.argsort(-scores, kind="stable")
    hits = np.cumsum(y[order] == 1.0)
    precision = hits / np.arange(1, len(y) + 1)
    return float(precision[y[order] == 1.0].sum() / n1)


def brier(y, probabilities):
    y = np.asarray(y, dtype=np.float64)
    p = np.asarray(probabilities, dtype=np.float64)
    return float(np.mean((p - y) ** 2))


def stratified_folds(y, k, seed):
    """Fold labels 0..k-1 with class proportions preserved per fold."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    fold = np.empty(len(y), dtype=np.int64)
    for cls in np.unique(y):
        idx = np.nonzero(y == cls)[0]
        idx = idx[rng.permutation(len(idx))]
        fold[idx] = np.arange(len(idx)) % k
    return fold


def fit_observational(table, predictors, outcome, folds=5, seed=0):
    """Fit and cross-validate the observational risk model."""
    predictors = tuple(predictors)
    X = table.matrix(predictors)
    y = table.column(outcome)
    fit = logistic_fit(X, y)
    p_full = predict_proba(fit, X)

    fold = stratified_folds(y, folds, seed)
    cv_scores = []
    for f in range(folds):
        test = fold == f
        fit_f = logistic_fit(X[~test], y[~test])
        cv_scores.append(auroc(y[test], predict_proba(fit_f, X[test])))
    cv_scores = np.asarray(cv_scores)

    ors = []
    for j, name in enumerate(predictors, start=1):
        beta = float(fit.coefficients[j])
        se = float(fit.standard_errors[j])
        z = abs(beta) / se if se > 0 else np.inf
        ors.append(
            OddsRatio(
                predictor=name,
                odds_ratio=float(np.exp(beta)),
                ci_low=float(np.exp(beta - _Z975 * se)),
                ci_high=float(np.exp(beta + _Z975 * se)),
                p_value=float(min(1.0, 2.0 * tail_probability("normal", z))),
            )
        )
    return ObservationalResult(
        auroc=auroc(y, p_full),
        cv_auroc_mean=float(cv_scores.mean()),
        cv_auroc_sd=float(cv_scores.std(ddof=1)),
        average_precision=average_precision(y, p_full),
        brier=brier(y, p_full),
        odds_ratios=tuple(ors),
    )
