"""Chained-equations imputation over a numeric matrix with NaN gaps.

Single-imputation variant: missing cells start at the observed column
mean (for binary columns that is the observed proportion), then each
sweep regresses every incomplete column on all other columns and
overwrites its missing cells with predictions. Continuous columns use
OLS; binary columns use logistic regression rounded at 0.5. Observed
cells are never modified. The procedure itself is deterministic; the
``seed`` parameter is accepted for call-site uniformity.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ValidationError
from .regress import logistic_fit, ols_fit, predict_proba


class ChainedEquationsImputer(BaseEstimator, TransformerMixin):
    def __init__(self, kinds, iterations=10, seed=None):
        self.kinds = kinds
        self.iterations = iterations
        self.seed = seed

    def fit(self, X, y=None):
        self.fit_transform(X)
        return self

    def fit_transform(self, X, y=None):
        if self.iterations < 1:
            raise ValidationError("iterations must be >= 1")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValidationError("X must be 2-dimensional")
        n, p = X.shape
        kinds = tuple(self.kinds)
        if len(kinds) != p:
            raise ValidationError(f"kinds has {len(kinds)} entries for {p} columns")
        mask = np.isnan(X)
        if not mask.any():
            self.n_features_in_ = p
            return X.copy()
        fully_missing = np.nonzero(mask.all(axis=0))[0]
        if fully_missing.size:
            raise ValidationError(f"column {fully_missing[0]} is entirely missing")
        if not np.any(~mask.any(axis=0)):
            raise ValidationError("need at least one fully observed column")

        work = X.copy()
        for j in range(p):
            mj = mask[:, j]
            if mj.any():
                work[mj, j] = np.nanmean(X[:, j])

        incomplete = [j for j in range(p) if mask[:, j].any()]
        for _ in range(self.iterations):
            for j in incomplete:
                mj = mask[:, j]
                others = [k for k in range(p) if k != j]
                design = work[:, others]
                y_obs = X[~mj, j]
                if kinds[j] == "binary":
                    levels = np.unique(y_obs)
                    if len(levels) == 1:
                        pred = np.full(int(mj.sum()), levels[0])
                    else:
                        fit = logistic_fit(design[~mj], y_obs)
                        pred = (predict_proba(fit, design[mj]) >= 0.5).astype(np.float64)
                else:
                    fit = ols_fit(design[~mj], y_obs)
                    pred = fit.coefficients[0] + design[mj] @ fit.coefficients[1:]
                work[mj, j] = pred

        self.n_features_in_ = p
        return work

    def transform(self, X):
        return self.fit_transform(X)
