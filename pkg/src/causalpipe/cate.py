"""Heterogeneous treatment effects: R-Learner and T-Learner metalearners.

The R-Learner handles the continuous treatment: cross-fitted boosted
nuisance models for the outcome and the treatment, a residualized
pseudo-outcome on rows with enough treatment variation, and a final
boosted regression weighted by the squared treatment residual. The
T-Learner handles the binary above/below-median contrast with separate
outcome models per arm. Subgroup summaries attach nonparametric
heterogeneity tests (Mann-Whitney for two strata, Kruskal-Wallis
beyond).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .boosting import BoostParams, fit_gbm
from .effects import binary_treatment
from .errors import ComputationError, ValidationError
from .ranktests import kruskal_wallis, mann_whitney_u, spearman  # noqa: F401  (re-export)
from .regress import normal_quantile
from .validation import check_is_fitted, check_matrix, check_same_length, check_vector

PROB_CLIP = 1e-4


@dataclass(frozen=True)
class RLearnerConfig:
    folds: int = 5
    residual_threshold: float = 2.0
    clip_percentiles: tuple = (5.0, 95.0)
    boost: BoostParams = field(default_factory=BoostParams)

    def __post_init__(self):
        if self.folds < 2:
            raise ValidationError("folds must be >= 2")
        if self.residual_threshold <= 0:
            raise ValidationError("residual_threshold must be positive")
        lo, hi = self.clip_percentiles
        if not 0 <= lo < hi <= 100:
            raise ValidationError("clip_percentiles must satisfy 0 <= low < high <= 100")


@dataclass(frozen=True)
class CateEstimates:
    tau: np.ndarray
    included: np.ndarray
    learner: str


@dataclass(frozen=True)
class SubgroupSummary:
    label: str
    n: int
    mean_tau: float
    implied_arr: float
    ci_low: float
    ci_high: float
    test_p: float | None


def _fold_assignment(n, folds, rng):
    # seeded shuffle then modular split: balanced and deterministic
    assignment = np.empty(n, dtype=np.int64)
    assignment[rng.permutation(n)] = np.arange(n) % folds
    return assignment


class RLearner(BaseEstimator):
    """Continuous-treatment CATE by residual-on-residual boosting.

    fit(X, t, y) cross-fits out-of-fold nuisance predictions m(X) for the
    outcome and e(X) for the treatment, keeps rows whose treatment
    residual exceeds ``residual_threshold`` in magnitude, forms the
    pseudo-outcome (y - m) / (t - e) clipped to ``clip_percentiles``
    over kept rows, and regresses it on X with weights (t - e)^2.

    Attributes after fit: ``tau_`` (predictions on all rows),
    ``included_`` (rows surviving the residual filter), ``model_``.
    """

    def __init__(self, folds=5, residual_threshold=2.0, clip_percentiles=(5.0, 95.0),
                 boost=None, random_state=0):
        self.folds = folds
        self.residual_threshold = residual_threshold
        self.clip_percentiles = clip_percentiles
        self.boost = boost
        self.random_state = random_state

    def fit(self, X, t, y):
        config = RLearnerConfig(
            folds=self.folds,
            residual_threshold=self.residual_threshold,
            clip_percentiles=tuple(self.clip_percentiles),
            boost=self.boost or BoostParams(),
        )
        X = check_matrix(X, "X")
        t = check_vector(t, "t")
        y = check_vector(y, "y")
        check_same_length(X, t, y, names=["X", "t", "y"])
        n = len(y)
        rng = np.random.default_rng(self.random_state)
        fold = _fold_assignment(n, config.folds, rng)

        y_binary = np.all((y == 0.0) | (y == 1.0))
        m_hat = np.empty(n)
        e_hat = np.empty(n)
        for f in range(config.folds):
            test = fold == f
            train = ~test
            if y_binary and len(np.unique(y[train])) < 2:
                raise ComputationError(f"training folds for fold {f} contain a single outcome class")
            m_model = fit_gbm(X[train], y[train], config.boost)
            m_hat[test] = m_model.predict(X[test])
            e_model = fit_gbm(X[train], t[train], config.boost)
            e_hat[test] = e_model.predict(X[test])

        resid = t - e_hat
        keep = np.abs(resid) > config.residual_threshold
        if keep.sum() < 10 * config.folds:
            raise ComputationError(
                f"only {int(keep.sum())} rows exceed the residual threshold; "
                f"need at least {10 * config.folds}"
            )
        psi = (y[keep] - m_hat[keep]) / resid[keep]
        lo, hi = np.percentile(psi, config.clip_percentiles)
        psi = np.clip(psi, lo, hi)
        self.model_ = fit_gbm(X[keep], psi, config.boost, sample_weight=resid[keep] ** 2)
        self.tau_ = self.model_.predict(X)
        self.included_ = keep
        self.outcome_residual_sd_ = float(np.std(y - m_hat))
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        return self.model_.predict(X)


class TLearner(BaseEstimator):
    """Binary-contrast CATE from separate outcome models per treatment arm.

    Predictions are used as probabilities, so they are clipped to
    [1e-4, 1 - 1e-4] before differencing. Every row is included.
    """

    def __init__(self, boost=None, random_state=0):
        self.boost = boost
        self.random_state = random_state

    def fit(self, X, t, y):
        X = check_matrix(X, "X")
        t = check_vector(t, "t")
        y = check_vector(y, "y")
        check_same_length(X, t, y, names=["X", "t", "y"])
        boost = self.boost or BoostParams()
        treated = t == 1.0
        if treated.sum() < 50 or (~treated).sum() < 50:
            raise ValidationError(
                f"need >= 50 rows per arm, got {int(treated.sum())} treated "
                f"and {int((~treated).sum())} control"
            )
        self.model_treated_ = fit_gbm(X[treated], y[treated], boost)
        self.model_control_ = fit_gbm(X[~treated], y[~treated], boost)
        self.tau_ = self.predict(X)
        self.included_ = np.ones(len(y), dtype=bool)
        return self

    def predict(self, X):
        check_is_fitted(self, "model_treated_")
        p1 = np.clip(self.model_treated_.predict(X), PROB_CLIP, 1.0 - PROB_CLIP)
        p0 = np.clip(self.model_control_.predict(X), PROB_CLIP, 1.0 - PROB_CLIP)
        return p1 - p0


def r_learner(table, spec, config=None, seed=0):
    """Run the R-Learner on a table under a causal model spec."""
    config = config or RLearnerConfig()
    X = table.matrix(spec.covariates)
    t = table.column(spec.treatment)
    y = table.column(spec.outcome)
    est = RLearner(
        folds=config.folds,
        residual_threshold=config.residual_threshold,
        clip_percentiles=config.clip_percentiles,
        boost=config.boost,
        random_state=seed,
    ).fit(X, t, y)
    return CateEstimates(tau=est.tau_, included=est.included_, learner="R")


def t_learner(table, spec, boost=None, seed=0):
    """Run the T-Learner at the above/below-median treatment contrast."""
    X = table.matrix(spec.covariates)
    t_bin, _ = binary_treatment(table, spec)
    y = table.column(spec.outcome)
    est = TLearner(boost=boost, random_state=seed).fit(X, t_bin, y)
    return CateEstimates(tau=est.tau_, included=est.included_, learner="T")


def subgroup_summary(est, groups, scale=20.0, n_boot=500, seed=0):
    """Per-stratum mean effects with bootstrap CIs and a heterogeneity test.

    ``groups`` labels every row; only rows included by the estimator are
    summarized. ``implied_arr`` rescales the per-unit mean by ``scale``
    (risk change for a ``scale``-unit treatment shift). The heterogeneity
    p-value (Mann-Whitney for two strata, Kruskal-Wallis for more) is
    attached to every row; it is None for a single stratum.
    """
    groups = np.asarray(groups)
    if len(groups) != len(est.tau):
        raise ValidationError("groups must label every row of the estimates")
    inc = est.included
    str_groups = np.asarray([str(g) for g in groups])
    labels = sorted(set(str_groups[inc]))
    taus = {lab: est.tau[inc & (str_groups == lab)] for lab in labels}
    for lab, tau in taus.items():
        if len(tau) < 2:
            raise ValidationError(f"stratum {lab!r} has fewer than 2 included rows")

    if len(labels) == 1:
        test_p = None
    elif len(labels) == 2:
        _, test_p = mann_whitney_u(taus[labels[0]], taus[labels[1]])
    else:
        _, test_p = kruskal_wallis([taus[lab] for lab in labels])

    boot_means = {lab: np.empty(n_boot) for lab in labels}
    for i in range(n_boot):
        rng = np.random.default_rng(seed + i)
        for lab in labels:
            tau = taus[lab]
            boot_means[lab][i] = tau[rng.integers(0, len(tau), len(tau))].mean()

    out = []
    for lab in labels:
        tau = taus[lab]
        mean = float(tau.mean())
        ci_low, ci_high = np.percentile(np.sort(boot_means[lab]), [2.5, 97.5])
        out.append(
            SubgroupSummary(
                label=lab,
                n=int(len(tau)),
                mean_tau=mean,
                implied_arr=scale * mean,
                ci_low=float(scale * ci_low),
                ci_high=float(scale * ci_high),
                test_p=test_p,
            )
        )
    return out


def minimum_detectable_effect(subgroup_n, tau_sd, power=0.8, alpha=0.05):
    """Smallest mean effect a one-sample test would detect at the given power."""
    if subgroup_n < 2:
        raise ValidationError("subgroup_n must be >= 2")
    if tau_sd <= 0:
        raise ValidationError("tau_sd must be positive")
    if not 0 < alpha < 1 or not 0 < power < 1:
        raise ValidationError("alpha and power must lie in (0, 1)")
    z_alpha = normal_quantile(1.0 - alpha / 2.0)
    z_power = normal_quantile(power)
    return (z_alpha + z_power) * tau_sd / np.sqrt(subgroup_n)
