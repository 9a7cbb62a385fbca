"""Small input-validation helpers shared across the package."""

import numpy as np


def as_float_array(x, name, min_len=0, require_finite=True):
    """Coerce to a 1-D float64 array, with a readable error on failure."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_len:
        raise ValueError(f"{name} needs at least {min_len} values, got {arr.size}")
    if require_finite and arr.size and not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise ValueError(f"{name} contains a non-finite value at index {bad}")
    return arr


def require_positive(value, name, strict=True):
    if strict and not value > 0:
        raise ValueError(f"{name} must be > 0, got {value}")
    if not strict and value < 0:
        raise ValueError(f"{name} must be >= 0, got {value}")
    return value


def require_all_positive(arr, name, strict=True):
    arr = np.asarray(arr)
    bad = np.flatnonzero(arr <= 0 if strict else arr < 0)
    if bad.size:
        op = ">" if strict else ">="
        raise ValueError(
            f"{name} must be {op} 0 everywhere; first offender at index "
            f"{int(bad[0])} ({arr[bad[0]]!r})"
        )
    return arr


def check_paired(a, b, name_a, name_b):
    if len(a) != len(b):
        raise ValueError(
            f"{name_a} and {name_b} must be paired, got lengths {len(a)} and {len(b)}"
        )
