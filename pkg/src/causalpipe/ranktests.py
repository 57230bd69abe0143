"""Nonparametric rank tests shared by the baseline table and CATE summaries."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .regress import tail_probability
from .validation import check_same_length, check_vector


def midranks(values):
    """Ranks 1..n with ties assigned the mean of the tied positions."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sv = values[order]
    i = 0
    while i < len(sv):
        j = i
        while j + 1 < len(sv) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _tie_counts(values):
    _, counts = np.unique(values, return_counts=True)
    return counts[counts > 1]


def mann_whitney_u(a, b):
    """Two-sided Mann-Whitney U via normal approximation with midrank ties.

    Returns (U, p) where U counts pairs (a_i, b_j) with a_i > b_j plus half
    the ties. Uses a continuity correction and the tie-corrected variance.
    """
    a = check_vector(a, "a")
    b = check_vector(b, "b")
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise ValidationError("each sample needs at least 2 values")
    pooled = np.concatenate([a, b])
    ranks = midranks(pooled)
    ra = ranks[:na].sum()
    u = ra - na * (na + 1) / 2.0
    n = na + nb
    ties = _tie_counts(pooled)
    tie_term = float(((ties**3 - ties).sum()) / (n * (n - 1))) if ties.size else 0.0
    var = na * nb / 12.0 * ((n + 1) - tie_term)
    if var <= 0.0:
        raise ValidationError("all pooled values identical; U variance is zero")
    mean = na * nb / 2.0
    z = (abs(u - mean) - 0.5) / np.sqrt(var)
    z = max(z, 0.0)
    p = min(1.0, 2.0 * tail_probability("normal", z))
    return float(u), float(p)


def kruskal_wallis(groups):
    """Tie-corrected Kruskal-Wallis H with chi-square p (df = #groups - 1)."""
    groups = [check_vector(g, f"group{i}") for i, g in enumerate(groups)]
    if len(groups) < 2:
        raise ValidationError("need at least 2 groups")
    for i, g in enumerate(groups):
        if len(g) < 2:
            raise ValidationError(f"group {i} needs at least 2 values")
    pooled = np.concatenate(groups)
    n = len(pooled)
    ranks = midranks(pooled)
    h = 0.0
    start = 0
    for g in groups:
        r = ranks[start : start + len(g)].sum()
        h += r * r / len(g)
        start += len(g)
    h = 12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)
    ties = _tie_counts(pooled)
    correction = 1.0 - float((ties**3 - ties).sum()) / (n**3 - n) if ties.size else 1.0
    if correction <= 0.0:
        raise ValidationError("all pooled values identical; H is undefined")
    h /= correction
    p = tail_probability("chi_square", max(h, 0.0), df=len(groups) - 1)
    return float(h), float(p)


def spearman(a, b):
    """Spearman rank correlation: Pearson correlation of midranks."""
    a = check_vector(a, "a")
    b = check_vector(b, "b")
    n = check_same_length(a, b, names=["a", "b"])
    if n < 3:
        raise ValidationError("need at least 3 pairs")
    ra = midranks(a)
    rb = midranks(b)
    ra = ra - ra.mean()
    rb = rb - rb.mean()
    denom = np.sqrt(float(ra @ ra) * float(rb @ rb))
    if denom == 0.0:
        raise ValidationError("constant vector; rank correlation undefined")
    return float(ra @ rb / denom)


def chi2_independence_2x2(table):
    """Pearson chi-square on a 2x2 count table, no continuity correction.

    Returns (statistic, p) with df = 1.
    """
    obs = np.asarray(table, dtype=np.float64)
    if obs.shape != (2, 2):
        raise ValidationError(f"expected a 2x2 table, got {obs.shape}")
    if np.any(obs < 0):
        raise ValidationError("counts must be nonnegative")
    row = obs.sum(axis=1)
    col = obs.sum(axis=0)
    total = obs.sum()
    if total <= 0 or np.any(row == 0) or np.any(col == 0):
        raise ValidationError("degenerate margin in 2x2 table")
    expected = np.outer(row, col) / total
    stat = float(((obs - expected) ** 2 / expected).sum())
    return stat, tail_probability("chi_square", stat, df=1)
