import numbers

import numpy as np
from sklearn.utils import check_scalar
from sklearn.utils.validation import check_array, column_or_1d


def check_unit_sample(X):
    """Return ``X`` as a finite 1-d float array of observations in ``[0, 1]``."""
    X = check_array(X, ensure_2d=False, dtype=np.float64)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError(f"expected one feature, got {X.shape[1]}")
        X = X[:, 0]
    X = column_or_1d(X)
    if np.any((X < 0.0) | (X > 1.0)):
        raise ValueError("observations must lie in [0, 1] (uniform reference measure)")
    return X


def check_probability(value, name, *, include_one=False):
    check_scalar(value, name, numbers.Real, min_val=0.0, max_val=1.0,
                 include_boundaries="right" if include_one else "neither")
    if value == 0.0:
        raise ValueError(f"{name} == 0, must be > 0")
    return float(value)
