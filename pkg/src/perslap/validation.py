"""Input validation helpers shared by the builders, CLI, and estimators."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist, squareform

__all__ = ["check_point_cloud", "check_distance_matrix", "point_cloud_distances"]


def check_point_cloud(X) -> np.ndarray:
    """Coerce to a finite 2-D float array of shape (n_points, n_coords)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError(f"point cloud must be a non-empty 2-D array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("point cloud contains non-finite values")
    return X


def check_distance_matrix(D, atol: float = 0.0) -> np.ndarray:
    """Validate a square symmetric non-negative matrix with zero diagonal."""
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {D.shape}")
    if not np.all(np.isfinite(D)):
        raise ValueError("distance matrix contains non-finite values")
    if not np.allclose(D, D.T, rtol=0.0, atol=atol):
        raise ValueError("distance matrix is not symmetric")
    if np.any(D < 0):
        raise ValueError("distance matrix has negative entries")
    if np.any(np.diag(D) != 0):
        raise ValueError("distance matrix has nonzero diagonal entries")
    return 0.5 * (D + D.T) if atol else D


def point_cloud_distances(X, metric: str = "euclidean") -> np.ndarray:
    """Pairwise distance matrix of a point cloud."""
    return squareform(pdist(check_point_cloud(X), metric=metric))
