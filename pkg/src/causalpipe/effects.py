"""Average causal effect estimators and bias diagnostics.

The primary estimator is g-computation (back-door standardization): fit
the outcome regression once, set the treatment column to the target
value for every row, and average the predicted risks over the empirical
covariate distribution. Alongside it: the naive unadjusted contrast and
the covariate-means plug-in (both quantify what less careful analyses
report), plus stratified propensity-score matching and stabilized IPW
for triangulation at a binary above/below-median treatment contrast.

All bootstrap confidence intervals use the percentile method with full
re-estimation per resample; replicate ``i`` draws from a generator
seeded ``seed + i``, so results are reproducible and independent of
execution order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dag import is_valid_backdoor
from .errors import (
    BootstrapError,
    ComputationError,
    IdentificationError,
    PositivityError,
    SingularDesignError,
    ValidationError,
)
from .regress import logistic_fit, predict_proba

PS_FLOOR = 1e-6


@dataclass(frozen=True)
class CausalModelSpec:
    """Estimand description: treatment, outcome, back-door set, precision covariates."""

    treatment: str
    outcome: str
    adjustment: tuple
    precision: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "adjustment", tuple(dict.fromkeys(self.adjustment)))
        object.__setattr__(self, "precision", tuple(dict.fromkeys(self.precision)))
        taken = set(self.adjustment) | set(self.precision)
        if self.treatment in taken or self.treatment == self.outcome:
            raise ValidationError("treatment cannot appear in adjustment/precision or equal outcome")
        if self.outcome in taken:
            raise ValidationError("outcome cannot appear in adjustment or precision sets")
        if set(self.adjustment) & set(self.precision):
            raise ValidationError("adjustment and precision sets must be disjoint")

    @property
    def covariates(self):
        return self.adjustment + self.precision


def validate_spec(dag, spec):
    """Check the adjustment set against the DAG's back-door criterion.

    Returns the verdict; raises IdentificationError when invalid.
    """
    verdict = is_valid_backdoor(dag, spec.treatment, spec.outcome, spec.adjustment)
    if not verdict.valid:
        reasons = []
        for v in verdict.violations:
            if v.kind == "descendant_of_treatment":
                reasons.append(f"{v.node} is a descendant of {spec.treatment}")
            else:
                reasons.append("open back-door path " + " - ".join(v.path))
        raise IdentificationError(
            f"adjustment set {set(spec.adjustment)} fails the back-door criterion: "
            + "; ".join(reasons)
        )
    return verdict


@dataclass(frozen=True)
class AceResult:
    risk_high: float
    risk_low: float
    ace: float
    rrr: float
    ci_low: float
    ci_high: float
    n_bootstrap: int
    seed: int


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple  # (treated_row, control_row) indices
    att: float
    ci_low: float
    ci_high: float
    balance: dict  # covariate -> (smd_before, smd_after)
    caliper: float
    n_pairs: int


@dataclass(frozen=True)
class IpwResult:
    ate: float
    ci_low: float
    ci_high: float
    weight_summary: tuple  # (max, mean, trim threshold)
    effective_sample_size: float


def _outcome_design(table, spec):
    names = (spec.treatment,) + spec.covariates
    X = table.matrix(names)
    y = table.column(spec.outcome)
    if table.mask(spec.outcome).any():
        raise ValidationError(f"outcome {spec.outcome!r} has missing values")
    if table.kind(spec.outcome) != "binary":
        raise ValidationError(f"outcome {spec.outcome!r} must be binary")
    return X, y


def _mean_risk_at(fit, X, s):
    X_do = X.copy()
    X_do[:, 0] = s
    return float(predict_proba(fit, X_do).mean())


def gcomp_interventional_risk(table, spec, s):
    """Marginal outcome risk under do(treatment = s) by standardization."""
    X, y = _outcome_design(table, spec)
    fit = logistic_fit(X, y)
    if not fit.converged:
        raise ComputationError(f"outcome model did not converge: {fit.diagnostic}")
    return _mean_risk_at(fit, X, s)


def dose_response_curve(table, spec, grid):
    """Interventional risk across a grid of treatment values, from one fit."""
    grid = list(grid)
    if not grid:
        raise ValidationError("grid must be non-empty")
    X, y = _outcome_design(table, spec)
    fit = logistic_fit(X, y)
    if not fit.converged:
        raise ComputationError(f"outcome model did not converge: {fit.diagnostic}")
    return [(float(s), _mean_risk_at(fit, X, s)) for s in grid]


def gcomp_ace(table, spec, s1, s0, n_boot=1500, seed=0):
    """ACE = risk(do(s1)) - risk(do(s0)) with a percentile bootstrap CI.

    Every resample refits the outcome model; more than 1% of replicates
    failing (singular or non-converged fits) aborts with BootstrapError.
    """
    if n_boot < 100:
        raise ValidationError("n_boot must be >= 100")
    X, y = _outcome_design(table, spec)
    fit = logistic_fit(X, y)
    if not fit.converged:
        raise ComputationError(f"outcome model did not converge: {fit.diagnostic}")
    risk_high = _mean_risk_at(fit, X, s1)
    risk_low = _mean_risk_at(fit, X, s0)
    ace = risk_high - risk_low

    n = len(y)
    max_failures = 0.01 * n_boot
    aces = np.empty(n_boot)
    kept = 0
    failures = 0
    for i in range(n_boot):
        rng = np.random.default_rng(seed + i)
        idx = rng.integers(0, n, n)
        try:
            fit_b = logistic_fit(X[idx], y[idx])
        except SingularDesignError:
            fit_b = None
        if fit_b is None or not fit_b.converged:
            failures += 1
            if failures > max_failures:
                raise BootstrapError(
                    f"{failures} of {i + 1} bootstrap refits failed; "
                    "data too unstable for a percentile interval"
                )
            continue
        Xb = X[idx]
        aces[kept] = _mean_risk_at(fit_b, Xb, s1) - _mean_risk_at(fit_b, Xb, s0)
        kept += 1
    draws = np.sort(aces[:kept])
    ci_low, ci_high = np.percentile(draws, [2.5, 97.5])
    return AceResult(
        risk_high=risk_high,
        risk_low=risk_low,
        ace=ace,
        rrr=ace / risk_high,
        ci_low=float(ci_low),
        ci_high=float(ci_high),
        n_bootstrap=n_boot,
        seed=seed,
    )


def naive_contrast(table, treatment, outcome, s1, s0, method="model", band_width=2.5):
    """Unadjusted risk difference between treatment levels s1 and s0.

    ``method="model"`` fits outcome ~ treatment alone and differences the
    predictions; ``method="band"`` compares empirical event rates within
    +-``band_width`` of each level.
    """
    t = table.column(treatment)
    if table.mask(treatment).any() or table.mask(outcome).any():
        raise ValidationError("treatment and outcome must be fully observed")
    y = table.column(outcome)
    if method == "model":
        fit = logistic_fit(t.reshape(-1, 1), y)
        if not fit.converged:
            raise ComputationError(f"naive model did not converge: {fit.diagnostic}")
        p1, p0 = predict_proba(fit, np.array([[s1], [s0]]))
        return float(p1 - p0)
    if method == "band":
        rates = []
        for s in (s1, s0):
            sel = np.abs(t - s) <= band_width
            if not sel.any():
                raise ComputationError(f"no rows within {band_width} of {s}")
            rates.append(float(y[sel].mean()))
        return rates[0] - rates[1]
    raise ValidationError(f"unknown method {method!r}")


def mean_z_plugin(table, spec, s1, s0):
    """Adjusted contrast with covariates frozen at their means (no marginalization)."""
    X, y = _outcome_design(table, spec)
    fit = logistic_fit(X, y)
    if not fit.converged:
        raise ComputationError(f"outcome model did not converge: {fit.diagnostic}")
    means = X.mean(axis=0)
    rows = np.vstack([means, means])
    rows[0, 0] = s1
    rows[1, 0] = s0
    p1, p0 = predict_proba(fit, rows)
    return float(p1 - p0)


def estimate_propensity(table, z, treatment_binary):
    """P(treated | z) by logistic regression; scores lie strictly in (0, 1)."""
    t = np.asarray(treatment_binary, dtype=np.float64)
    Z = table.matrix(tuple(z))
    fit = logistic_fit(Z, t)
    scores = predict_proba(fit, Z)
    return scores


def binary_treatment(table, spec):
    """Above/below-median contrast for the continuous treatment column."""
    t = table.column(spec.treatment)
    if table.mask(spec.treatment).any():
        raise ValidationError(f"treatment {spec.treatment!r} has missing values")
    median = float(np.median(t))
    return (t > median).astype(np.float64), median


def standardized_mean_difference(x_treated, x_control, binary):
    mt, mc = float(np.mean(x_treated)), float(np.mean(x_control))
    if binary:
        vt, vc = mt * (1.0 - mt), mc * (1.0 - mc)
    else:
        vt = float(np.var(x_treated, ddof=1)) if len(x_treated) > 1 else 0.0
        vc = float(np.var(x_control, ddof=1)) if len(x_control) > 1 else 0.0
    denom = np.sqrt((vt + vc) / 2.0)
    if denom == 0.0:
        return 0.0
    return (mt - mc) / denom


def _greedy_match(ps_treated, rows_treated, ps_control, rows_control, caliper):
    """Nearest-neighbour matching without replacement.

    Treated units are processed in descending propensity score (ties by
    ascending row index); each takes the closest unused control within
    the caliper, preferring the lower row index on exact distance ties.
    """
    order = np.lexsort((rows_treated, -ps_treated))
    c_order = np.lexsort((rows_control, ps_control))
    c_ps = ps_control[c_order]
    c_rows = rows_control[c_order]
    m = len(c_ps)
    left = np.arange(-1, m - 1)  # previous alive index
    right = np.arange(1, m + 1)  # next alive index
    alive = np.ones(m, dtype=bool)

    def prev_alive(i):
        while i >= 0 and not alive[i]:
            i = left[i]
        return i

    def next_alive(i):
        while i < m and not alive[i]:
            i = right[i]
        return i

    pairs = []
    for ti in order:
        p = ps_treated[ti]
        pos = int(np.searchsorted(c_ps, p))
        lo = prev_alive(pos - 1)
        hi = next_alive(pos)
        best = -1
        best_dist = caliper
        if hi < m:
            d = abs(c_ps[hi] - p)
            if d <= best_dist:
                best, best_dist = hi, d
        if lo >= 0:
            d = abs(c_ps[lo] - p)
            if d < best_dist or (d == best_dist and (best < 0 or c_rows[lo] < c_rows[best])):
                best, best_dist = lo, d
        if best < 0:
            continue
        alive[best] = False
        # splice out of the alive list
        if left[best] >= 0:
            right[left[best]] = right[best]
        if right[best] < m:
            left[right[best]] = left[best]
        pairs.append((int(rows_treated[ti]), int(c_rows[best])))
    return pairs


def psm_att(table, spec, caliper=0.05, stratum=None, n_boot=800, seed=0):
    """Stratified propensity-score matching ATT at the above-median contrast.

    Matching is greedy nearest-neighbour without replacement within each
    stratum; unmatched treated units are dropped. The CI resamples
    matched pairs. The balance table reports standardized mean
    differences before and after matching for each adjustment covariate.
    """
    t_bin, _ = binary_treatment(table, spec)
    y = table.column(spec.outcome)
    ps = estimate_propensity(table, spec.adjustment, t_bin)
    if stratum is None:
        strata = np.zeros(table.n_rows)
    else:
        strata = table.column(stratum)
        if table.mask(stratum).any():
            raise ValidationError(f"stratum column {stratum!r} has missing values")

    pairs = []
    for value in np.unique(strata):
        in_stratum = strata == value
        treated = np.nonzero(in_stratum & (t_bin == 1.0))[0]
        control = np.nonzero(in_stratum & (t_bin == 0.0))[0]
        if len(treated) == 0 or len(control) == 0:
            raise ValidationError(
                f"stratum {value} has {len(treated)} treated and {len(control)} control rows"
            )
        pairs.extend(_greedy_match(ps[treated], treated, ps[control], control, caliper))
    if not pairs:
        raise ComputationError("no matched pairs within the caliper")
    t_rows = np.array([a for a, _ in pairs])
    c_rows = np.array([b for _, b in pairs])
    diffs = y[t_rows] - y[c_rows]
    att = float(diffs.mean())

    n_pairs = len(pairs)
    boots = np.empty(n_boot)
    for i in range(n_boot):
        rng = np.random.default_rng(seed + i)
        idx = rng.integers(0, n_pairs, n_pairs)
        boots[i] = diffs[idx].mean()
    ci_low, ci_high = np.percentile(np.sort(boots), [2.5, 97.5])

    balance = {}
    treated_all = t_bin == 1.0
    for cov in spec.adjustment:
        col = table.column(cov)
        binary = table.kind(cov) == "binary"
        before = standardized_mean_difference(col[treated_all], col[~treated_all], binary)
        after = standardized_mean_difference(col[t_rows], col[c_rows], binary)
        balance[cov] = (before, after)

    return MatchResult(
        pairs=tuple(pairs),
        att=att,
        ci_low=float(ci_low),
        ci_high=float(ci_high),
        balance=balance,
        caliper=caliper,
        n_pairs=n_pairs,
    )


def _stabilized_weights(t_bin, ps, trim_percentile):
    p_treated = float(t_bin.mean())
    denom = np.where(t_bin == 1.0, ps, 1.0 - ps)
    bad = np.nonzero(denom < PS_FLOOR)[0]
    if bad.size:
        raise PositivityError(bad.tolist())
    w = np.where(t_bin == 1.0, p_treated, 1.0 - p_treated) / denom
    threshold = float(np.percentile(w, trim_percentile))
    return np.minimum(w, threshold), threshold


def _weighted_ate(t_bin, y, w):
    treated = t_bin == 1.0
    return float(
        np.average(y[treated], weights=w[treated])
        - np.average(y[~treated], weights=w[~treated])
    )


def ipw_ate(table, spec, trim_percentile=98, n_boot=800, seed=0):
    """Stabilized inverse-probability-weighted ATE at the above-median contrast.

    Weights are marginal treatment probability over estimated conditional
    probability, capped at their ``trim_percentile`` value. The bootstrap
    re-estimates propensity scores in every resample.
    """
    t_bin, _ = binary_treatment(table, spec)
    y = table.column(spec.outcome)
    Z = table.matrix(spec.adjustment)
    ps = estimate_propensity(table, spec.adjustment, t_bin)
    w, threshold = _stabilized_weights(t_bin, ps, trim_percentile)
    ate = _weighted_ate(t_bin, y, w)

    n = len(y)
    boots = np.empty(n_boot)
    for i in range(n_boot):
        rng = np.random.default_rng(seed + i)
        idx = rng.integers(0, n, n)
        tb, yb, Zb = t_bin[idx], y[idx], Z[idx]
        fit = logistic_fit(Zb, tb)
        ps_b = predict_proba(fit, Zb)
        wb, _ = _stabilized_weights(tb, ps_b, trim_percentile)
        boots[i] = _weighted_ate(tb, yb, wb)
    ci_low, ci_high = np.percentile(np.sort(boots), [2.5, 97.5])

    return IpwResult(
        ate=ate,
        ci_low=float(ci_low),
        ci_high=float(ci_high),
        weight_summary=(float(w.max()), float(w.mean()), threshold),
        effective_sample_size=float(w.sum() ** 2 / (w @ w)),
    )
