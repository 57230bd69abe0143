"""E-values: how strong unmeasured confounding must be to nullify an effect."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .effects import _mean_risk_at, _outcome_design
from .errors import BootstrapError, ComputationError, ValidationError
from .regress import logistic_fit


@dataclass(frozen=True)
class EvalueRow:
    intervention_mmhg: float
    ace: float
    risk_ratio: float
    e_point: float
    e_ci: float


def causal_risk_ratio(risk_high, risk_low):
    """Ratio of interventional risks; both must lie in (0, 1)."""
    for name, r in (("risk_high", risk_high), ("risk_low", risk_low)):
        if not 0.0 < r < 1.0:
            raise ValidationError(f"{name} must lie in (0, 1), got {r}")
    return risk_high / risk_low


def e_value(rr):
    """RR + sqrt(RR * (RR - 1)); protective ratios are inverted first."""
    if rr <= 0.0:
        raise ValidationError(f"risk ratio must be positive, got {rr}")
    if rr < 1.0:
        rr = 1.0 / rr
    return rr + np.sqrt(rr * (rr - 1.0))


def e_value_table(table, spec, interventions, n_boot=1500, seed=0):
    """E-values for a grid of treatment reductions from the cohort mean.

    For each reduction, the ACE and risk ratio come from g-computation at
    (mean, mean - reduction). ``e_ci`` applies the formula to the
    bootstrap risk-ratio bound nearer the null, and is 1 when the CI
    crosses the null. Rows are ordered by reduction, largest first.
    """
    interventions = sorted({float(d) for d in interventions}, reverse=True)
    if any(d < 0 for d in interventions):
        raise ValidationError("interventions must be nonnegative reductions")
    X, y = _outcome_design(table, spec)
    s1 = float(X[:, 0].mean())
    fit = logistic_fit(X, y)
    if not fit.converged:
        raise ComputationError(f"outcome model did not converge: {fit.diagnostic}")
    risk_high = _mean_risk_at(fit, X, s1)
    point = []
    for delta in interventions:
        risk_low = _mean_risk_at(fit, X, s1 - delta)
        point.append((risk_high - risk_low, causal_risk_ratio(risk_high, risk_low)))

    n = len(y)
    max_failures = 0.01 * n_boot
    rr_draws = np.empty((n_boot, len(interventions)))
    kept = 0
    failures = 0
    for i in range(n_boot):
        rng = np.random.default_rng(seed + i)
        idx = rng.integers(0, n, n)
        try:
            fit_b = logistic_fit(X[idx], y[idx])
        except ComputationError:
            fit_b = None
        if fit_b is None or not fit_b.converged:
            failures += 1
            if failures > max_failures:
                raise BootstrapError(f"{failures} of {i + 1} bootstrap refits failed")
            continue
        Xb = X[idx]
        rh = _mean_risk_at(fit_b, Xb, s1)
        for j, delta in enumerate(interventions):
            rr_draws[kept, j] = rh / _mean_risk_at(fit_b, Xb, s1 - delta)
        kept += 1

    rows = []
    for j, delta in enumerate(interventions):
        ace, rr = point[j]
        draws = np.sort(rr_draws[:kept, j])
        lo, hi = np.percentile(draws, [2.5, 97.5])
        if rr >= 1.0:
            near_null = lo
            e_ci = 1.0 if near_null <= 1.0 else e_value(near_null)
        else:
            near_null = hi
            e_ci = 1.0 if near_null >= 1.0 else e_value(near_null)
        rows.append(
            EvalueRow(
                intervention_mmhg=delta,
                ace=float(ace),
                risk_ratio=float(rr),
                e_point=float(e_value(rr)),
                e_ci=float(e_ci),
            )
        )
    return rows
