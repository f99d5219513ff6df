"""Input validation helpers used across the package."""

import numbers

import numpy as np
from sklearn.utils import check_array


def check_points(x, dim, name="x"):
    """Return ``x`` as a float array of shape ``(n, dim)``.

    A single point given as a flat sequence of length ``dim`` is promoted
    to shape ``(1, dim)``.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1 and arr.shape[0] == dim:
        arr = arr[None, :]
    elif arr.ndim == 1 and dim == 1:
        arr = arr[:, None]
    arr = check_array(arr, dtype=np.float64, ensure_2d=True, input_name=name)
    if arr.shape[1] != dim:
        raise ValueError(f"{name} must have {dim} columns, got {arr.shape[1]}")
    return arr


def check_positive(value, name):
    """Validate a strictly positive finite real number."""
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_derivative(derivative, dim, max_order=2):
    """Normalize a derivative multi-index; ``None`` means no derivative."""
    if derivative is None:
        return (0,) * dim
    alpha = tuple(int(a) for a in derivative)
    if len(alpha) != dim:
        raise ValueError(f"derivative must have {dim} entries, got {len(alpha)}")
    if any(a < 0 for a in alpha):
        raise ValueError("derivative orders must be nonnegative")
    if sum(alpha) > max_order:
        raise ValueError(f"derivative order {sum(alpha)} exceeds the supported maximum {max_order}")
    return alpha
