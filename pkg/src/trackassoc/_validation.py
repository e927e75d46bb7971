"""Input validation helpers shared by the estimators and low-level functions."""

from __future__ import annotations

import numpy as np

PSD_TOL = 1e-9


def check_state_vector(x, dim: int = 4) -> np.ndarray:
    arr = np.array(x, dtype=float)
    if arr.shape != (dim,):
        raise ValueError(f"state vector must have shape ({dim},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("state vector contains non-finite values")
    return arr


def check_covariance(P, dim: int = 4, name: str = "covariance", tol: float = PSD_TOL) -> np.ndarray:
    """Return ``P`` as a float array after checking symmetry and PSD-ness."""
    arr = np.array(P, dtype=float)
    if arr.shape != (dim, dim):
        raise ValueError(f"{name} must have shape ({dim}, {dim}), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    scale = max(1.0, float(np.abs(arr).max()))
    if np.abs(arr - arr.T).max() > tol * scale:
        raise ValueError(f"{name} is not symmetric")
    if np.linalg.eigvalsh(arr).min() < -tol * scale:
        raise ValueError(f"{name} is not positive semi-definite")
    return arr


def check_positive(value, name: str) -> float:
    v = float(value)
    if not v > 0:
        raise ValueError(f"{name} must be positive, got {value!r}")
    return v


def check_non_negative(value, name: str) -> float:
    v = float(value)
    if not v >= 0:
        raise ValueError(f"{name} must be non-negative, got {value!r}")
    return v
