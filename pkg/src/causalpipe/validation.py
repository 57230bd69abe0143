"""Input validation helpers shared by the estimators and analysis functions."""

import numpy as np

from .errors import ValidationError


def check_matrix(X, name="X", allow_nan=False):
    """Coerce to a 2-D float64 array, rejecting non-finite values unless allowed."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise ValidationError(f"{name} must be 2-dimensional, got ndim={X.ndim}")
    if not allow_nan and not np.all(np.isfinite(X)):
        raise ValidationError(f"{name} contains non-finite values")
    return X


def check_vector(y, name="y", allow_nan=False):
    y = np.asarray(y, dtype=np.float64).ravel()
    if not allow_nan and not np.all(np.isfinite(y)):
        raise ValidationError(f"{name} contains non-finite values")
    return y


def check_binary(y, name="y"):
    """Validate a {0, 1} vector and return it as float64."""
    y = check_vector(y, name)
    if not np.all((y == 0.0) | (y == 1.0)):
        bad = y[(y != 0.0) & (y != 1.0)][:3]
        raise ValidationError(f"{name} must contain only 0 and 1, found {bad.tolist()}")
    return y


def check_same_length(*arrays, names=None):
    lengths = [len(a) for a in arrays]
    if len(set(lengths)) > 1:
        labels = names or [f"array{i}" for i in range(len(arrays))]
        detail = ", ".join(f"{n}={m}" for n, m in zip(labels, lengths))
        raise ValidationError(f"length mismatch: {detail}")
    return lengths[0] if lengths else 0


def check_is_fitted(estimator, attribute):
    if not hasattr(estimator, attribute):
        raise ValidationError(
            f"{type(estimator).__name__} is not fitted yet; call fit() first"
        )
