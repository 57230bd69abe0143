"""Estimation core: OLS, logistic regression by IRLS, partial correlation.

Every hypothesis test in the package funnels through
:func:`tail_probability`, which is backed by scipy's special functions
(the tests cross-check them against direct quadrature of the densities).
Designs receive an implicit leading intercept column unless the caller
opts out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import SingularDesignError, ValidationError
from .validation import check_binary, check_matrix, check_same_length, check_vector

IRLS_TOL = 1e-8
IRLS_MAX_ITER = 100
SEPARATION_BOUND = 50.0  # |coefficient| beyond this flags quasi-separation
_Z975 = 1.959963984540054


@dataclass(frozen=True)
class FitResult:
    """Coefficients and inference for one OLS or logistic fit.

    ``coefficients[0]`` is the intercept when the design was augmented.
    ``converged`` is always True for OLS; for logistic fits a False value
    carries an explanation in ``diagnostic``.
    """

    coefficients: np.ndarray
    standard_errors: np.ndarray
    covariance: np.ndarray
    converged: bool
    log_likelihood: float
    n_observations: int
    diagnostic: str | None = None
    loglik_path: tuple = ()

    @property
    def n_parameters(self):
        return len(self.coefficients)


@dataclass(frozen=True)
class PartialCorrelation:
    r: float
    p_value: float
    n: int
    k: int


def _augment(design, add_intercept):
    design = check_matrix(design, "design")
    if add_intercept:
        return np.hstack([np.ones((design.shape[0], 1)), design])
    return design


def ols_fit(design, response, add_intercept=True):
    """Least-squares fit with classical standard errors.

    Parameters
    ----------
    design : array (n, p)
        Covariate matrix, without intercept (added automatically unless
        ``add_intercept=False``).
    response : array (n,)

    Raises
    ------
    SingularDesignError
        If the (augmented) design is rank deficient.
    """
    X = _augment(design, add_intercept)
    y = check_vector(response, "response")
    n, p = X.shape
    check_same_length(X, y, names=["design", "response"])
    if n < p + 1:
        raise ValidationError(f"need at least {p + 1} rows for {p} parameters, got {n}")
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if diag.min() <= max(n, p) * np.finfo(float).eps * max(diag.max(), 1.0):
        raise SingularDesignError("design matrix is rank deficient")
    beta = np.linalg.solve(r, q.T @ y)
    resid = y - X @ beta
    rss = float(resid @ resid)
    sigma2 = rss / (n - p)
    r_inv = np.linalg.solve(r, np.eye(p))
    cov = sigma2 * (r_inv @ r_inv.T)
    se = np.sqrt(np.diag(cov))
    # gaussian log likelihood at the MLE variance rss/n
    ll = -0.5 * n * (np.log(2.0 * np.pi * max(rss / n, 1e-300)) + 1.0)
    return FitResult(
        coefficients=beta,
        standard_errors=se,
        covariance=cov,
        converged=True,
        log_likelihood=float(ll),
        n_observations=n,
    )


def _bernoulli_loglik(eta, y):
    # sum y*eta - log(1 + exp(eta)), computed stably
    return float(y @ eta - np.logaddexp(0.0, eta).sum())


def sigmoid(eta):
    return special.expit(eta)


def logistic_fit(design, response, max_iter=IRLS_MAX_ITER, tol=IRLS_TOL, add_intercept=True):
    """Bernoulli maximum likelihood via iteratively reweighted least squares.

    Newton steps with step halving whenever a full step would lower the
    log likelihood, so the likelihood path is non-decreasing. Convergence
    when the score's max component or the step norm drops below ``tol``.
    Non-convergence is reported, not raised: ``converged=False`` with a
    diagnostic, including a separation flag when any coefficient exceeds
    ``SEPARATION_BOUND``.
    """
    X = _augment(design, add_intercept)
    y = check_binary(response, "response")
    n, p = X.shape
    check_same_length(X, y, names=["design", "response"])
    if n < p + 1:
        raise ValidationError(f"need at least {p + 1} rows for {p} parameters, got {n}")

    beta = np.zeros(p)
    eta = X @ beta
    ll = _bernoulli_loglik(eta, y)
    path = [ll]
    converged = False
    diagnostic = None
    for _ in range(max_iter):
        mu = sigmoid(eta)
        w = mu * (1.0 - mu)
        score = X.T @ (y - mu)
        info = (X * w[:, None]).T @ X
        try:
            step = np.linalg.solve(info, score)
        except np.linalg.LinAlgError as exc:
            raise SingularDesignError(f"singular information matrix: {exc}") from exc
        if np.max(np.abs(score)) < tol:
            converged = True
            break
        scale = 1.0
        for _ in range(30):
            candidate = beta + scale * step
            ll_new = _bernoulli_loglik(X @ candidate, y)
            if ll_new >= ll - 1e-12:
                break
            scale *= 0.5
        beta = beta + scale * step
        eta = X @ beta
        ll_new = _bernoulli_loglik(eta, y)
        assert ll_new >= ll - 1e-10, "IRLS likelihood decreased"
        ll = ll_new
        path.append(ll)
        if np.linalg.norm(scale * step) < tol:
            converged = True
            break

    mu = sigmoid(X @ beta)
    w = mu * (1.0 - mu)
    info = (X * w[:, None]).T @ X
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError as exc:
        raise SingularDesignError(f"singular information matrix at optimum: {exc}") from exc
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    saturated = bool(np.any(mu < 1e-10) or np.any(mu > 1.0 - 1e-10))
    if converged and saturated:
        # the score only vanished because probabilities hit 0/1
        converged = False
    if not converged:
        if saturated or np.max(np.abs(beta)) > SEPARATION_BOUND:
            diagnostic = (
                "fitted probabilities reached 0 or 1 "
                f"(max |coefficient| {np.max(np.abs(beta)):.3g}); data are likely separated"
            )
        else:
            diagnostic = f"no convergence after {max_iter} iterations"
    return FitResult(
        coefficients=beta,
        standard_errors=se,
        covariance=cov,
        converged=converged,
        log_likelihood=ll,
        n_observations=n,
        diagnostic=diagnostic,
        loglik_path=tuple(path),
    )


def predict_proba(fit, design, add_intercept=True):
    """Inverse-logit predictions from a logistic FitResult."""
    X = _augment(design, add_intercept)
    if X.shape[1] != fit.n_parameters:
        raise ValidationError(
            f"design width {X.shape[1]} does not match fit with {fit.n_parameters} parameters"
        )
    return sigmoid(X @ fit.coefficients)


def _residualize(v, z_aug):
    q, r = np.linalg.qr(z_aug)
    diag = np.abs(np.diag(r))
    if diag.min() <= z_aug.shape[0] * np.finfo(float).eps * max(diag.max(), 1.0):
        raise SingularDesignError("conditioning matrix is rank deficient")
    coef = np.linalg.solve(r, q.T @ v)
    return v - z_aug @ coef


def partial_correlation(x, y, z=None):
    """Correlation of x and y after regressing both on z (plus intercept).

    p-value from t = r * sqrt((n-2-k) / (1-r^2)) with df = n-2-k, two sided.
    With empty z this is the plain Pearson correlation.
    """
    x = check_vector(x, "x")
    y = check_vector(y, "y")
    n = check_same_length(x, y, names=["x", "y"])
    if z is None or (hasattr(z, "__len__") and len(z) == 0):
        z_mat = np.empty((n, 0))
    else:
        z_mat = check_matrix(z, "z")
        check_same_length(x, z_mat, names=["x", "z"])
    k = z_mat.shape[1]
    if n <= k + 3:
        raise ValidationError(f"need n > k + 3 (n={n}, k={k})")
    z_aug = np.hstack([np.ones((n, 1)), z_mat])
    rx = _residualize(x, z_aug)
    ry = _residualize(y, z_aug)
    sx = float(rx @ rx)
    sy = float(ry @ ry)
    if sx <= 1e-12 * max(1.0, float(x @ x)) or sy <= 1e-12 * max(1.0, float(y @ y)):
        raise ValidationError("residual vector is constant; correlation undefined")
    r = float(rx @ ry / np.sqrt(sx * sy))
    r = min(1.0, max(-1.0, r))
    df = n - 2 - k
    if abs(r) >= 1.0:
        p = 0.0
    else:
        t = r * np.sqrt(df / (1.0 - r * r))
        p = 2.0 * tail_probability("student_t", abs(t), df)
    return PartialCorrelation(r=r, p_value=float(p), n=n, k=k)


def tail_probability(dist, statistic, df=None):
    """Upper-tail probability P(X > statistic) for the named distribution.

    ``dist`` is one of ``normal``, ``student_t``, ``chi_square``; ``df`` is
    required for the latter two and must be >= 1.
    """
    s = float(statistic)
    if dist == "normal":
        return float(special.ndtr(-s))
    if df is None or df < 1:
        raise ValidationError(f"df must be >= 1 for {dist}, got {df}")
    if dist == "student_t":
        return float(special.stdtr(df, -s))
    if dist == "chi_square":
        if s < 0:
            return 1.0
        return float(special.chdtrc(df, s))
    raise ValidationError(f"unknown distribution {dist!r}")


def normal_quantile(q):
    """Inverse standard-normal CDF."""
    if not 0.0 < q < 1.0:
        raise ValidationError(f"quantile must be in (0, 1), got {q}")
    return float(special.ndtri(q))


def wald_interval(coef, se, level=0.95):
    """Symmetric normal-approximation CI; level fixed at 95% by default."""
    z = normal_quantile(0.5 + level / 2.0)
    return coef - z * se, coef + z * se
