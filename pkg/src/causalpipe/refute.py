"""Falsification checks: permutation nulls and impossible placebo instruments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .effects import _mean_risk_at, _outcome_design
from .errors import ComputationError, ValidationError
from .regress import _Z975, logistic_fit, ols_fit, tail_probability


@dataclass(frozen=True)
class PermutationResult:
    observed_ace: float
    null_mean: float
    null_sd: float
    p_value: float
    n_permutations: int
    null_samples: tuple = ()


@dataclass(frozen=True)
class PlaceboResult:
    instrument: str
    target: str
    coefficient: float
    ci_low: float
    ci_high: float
    p_value: float
    passed: bool


def permutation_refute(table, spec, s1, s0, n_perm=600, seed=0):
    """Null distribution of the g-computation ACE under shuffled treatment.

    Permutation ``i`` shuffles the treatment column with a generator
    seeded ``seed + i`` (covariates and outcome fixed) and recomputes the
    full standardized ACE. Two-sided p with the add-one convention, so
    p >= 1 / (n_perm + 1).
    """
    if n_perm < 1:
        raise ValidationError("n_perm must be >= 1")
    X, y = _outcome_design(table, spec)
    fit = logistic_fit(X, y)
    if not fit.converged:
        raise ComputationError(f"outcome model did not converge: {fit.diagnostic}")
    observed = _mean_risk_at(fit, X, s1) - _mean_risk_at(fit, X, s0)

    null = np.empty(n_perm)
    for i in range(n_perm):
        rng = np.random.default_rng(seed + i)
        Xp = X.copy()
        Xp[:, 0] = X[rng.permutation(len(y)), 0]
        fit_p = logistic_fit(Xp, y)
        null[i] = _mean_risk_at(fit_p, Xp, s1) - _mean_risk_at(fit_p, Xp, s0)
    extreme = int(np.sum(np.abs(null) >= abs(observed)))
    p = (1.0 + extreme) / (n_perm + 1.0)
    return PermutationResult(
        observed_ace=float(observed),
        null_mean=float(null.mean()),
        null_sd=float(null.std(ddof=1)) if n_perm > 1 else 0.0,
        p_value=float(p),
        n_permutations=n_perm,
        null_samples=tuple(float(v) for v in null),
    )


def placebo_instrument_test(table, instrument, target, adjust=()):
    """Regress a target on an instrument that cannot causally affect it.

    OLS when the target is continuous, logistic when binary; the
    adjustment set is appended as covariates. Inference is normal-theory
    Wald on the instrument coefficient, so ``passed`` (p > 0.05), the p
    value, and the CI straddling zero are exactly consistent.
    """
    adjust = tuple(adjust)
    if instrument in adjust:
        raise ValidationError("instrument cannot appear in the adjustment set")
    if instrument == target:
        raise ValidationError("instrument and target must differ")
    names = (instrument,) + adjust
    X = table.matrix(names)
    if table.mask(target).any():
        raise ValidationError(f"target {target!r} has missing values")
    y = table.column(target)
    if table.kind(target) == "binary":
        fit = logistic_fit(X, y)
    else:
        fit = ols_fit(X, y)
    coef = float(fit.coefficients[1])
    se = float(fit.standard_errors[1])
    if se == 0.0:
        raise ComputationError("degenerate fit: zero standard error for the instrument")
    z = abs(coef) / se
    p = min(1.0, 2.0 * tail_probability("normal", z))
    return PlaceboResult(
        instrument=instrument,
        target=target,
        coefficient=coef,
        ci_low=coef - _Z975 * se,
        ci_high=coef + _Z975 * se,
        p_value=float(p),
        passed=bool(p > 0.05),
    )
