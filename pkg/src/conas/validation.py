"""Input validation helpers shared across the package."""
from __future__ import annotations

import numpy as np


def _first_bad_value(arr: np.ndarray) -> object:
    flat = np.asarray(arr).ravel()
    bad = ~np.isin(flat, (-1, 1))
    return flat[np.argmax(bad)]


def check_encoding(alpha, n: int | None = None) -> np.ndarray:
    """Validate a single encoding: a 1-d vector with every entry in {-1, +1}."""
    arr = np.asarray(alpha)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d encoding, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"encoding has length {arr.shape[0]}, expected {n}")
    if arr.size and not np.isin(arr, (-1, 1)).all():
        raise ValueError(f"encoding entries must be -1 or +1, found {_first_bad_value(arr)!r}")
    return arr.astype(np.int8, copy=False)


def check_encodings(X, n: int | None = None) -> np.ndarray:
    """Validate a batch of encodings: a 2-d array, one encoding per row."""
    arr = np.asarray(X)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d array of encodings, got shape {arr.shape}")
    if n is not None and arr.shape[1] != n:
        raise ValueError(f"encodings have dimension {arr.shape[1]}, expected {n}")
    if arr.size and not np.isin(arr, (-1, 1)).all():
        raise ValueError(f"encoding entries must be -1 or +1, found {_first_bad_value(arr)!r}")
    return arr.astype(np.int8, copy=False)


def check_values(y, expected: int | None = None) -> np.ndarray:
    """Validate measurement values: a finite 1-d float vector."""
    arr = np.asarray(y, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d value vector, got shape {arr.shape}")
    if expected is not None and arr.shape[0] != expected:
        raise ValueError(f"got {arr.shape[0]} values, expected {expected}")
    if not np.isfinite(arr).all():
        idx = int(np.argmin(np.isfinite(arr)))
        raise ValueError(f"non-finite measurement value at index {idx}")
    return arr
