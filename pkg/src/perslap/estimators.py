"""scikit-learn transformers turning point clouds into spectral feature grids."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .builders import rips
from .family import all_pairs_grid, family_diagonal, family_fixed_delta
from .spectra import ZeroPolicy
from .validation import check_distance_matrix, point_cloud_distances

__all__ = ["PersistentLaplacianGrid"]


class PersistentLaplacianGrid(TransformerMixin, BaseEstimator):
    """Fixed-length spectral-summary features from point clouds.

    Each sample (a point cloud or a precomputed distance matrix) is turned
    into a Vietoris-Rips complex; persistent-Laplacian summary statistics
    over a shared filtration grid become the feature vector.  The grid is
    taken from ``grid`` or learned in :meth:`fit` as quantiles of the pooled
    pairwise distances, so all samples map to the same cells.

    Parameters
    ----------
    dim : int
        Chain dimension of the Laplacians.
    max_dim : int
        Top dimension of the Rips complexes (needs ``>= dim + 1`` for a
        nontrivial up part).
    grid : array-like or None
        Explicit sorted filtration values; None learns them from the data.
    n_grid : int
        Number of quantile grid values when learning.
    mode : {"all_pairs", "diagonal", "fixed_delta"}
        Which (a, b) family to evaluate over the grid.
    stat : {"min_nonzero", "max", "mean_nonzero", "betti", "count"}
        Scalar summary per grid cell.
    delta : float or None
        Persistence offset, required for ``mode="fixed_delta"``.
    threshold : float or None
        Rips diameter cutoff; None keeps all subsets.
    metric : str
        Point-cloud metric (ignored for ``input_type="distances"``).
    input_type : {"points", "distances"}
    missing_value : float
        Fill value for undefined cells (default NaN).
    abs_tol, rel_tol : float
        Zero-eigenvalue threshold policy.
    jobs : int
        Worker threads per sample grid.
    """

    def __init__(self, dim=1, max_dim=2, grid=None, n_grid=8, mode="all_pairs",
                 stat="min_nonzero", delta=None, threshold=None,
                 metric="euclidean", input_type="points",
                 missing_value=np.nan, abs_tol=1e-8, rel_tol=1e-10, jobs=1):
        self.dim = dim
        self.max_dim = max_dim
        self.grid = grid
        self.n_grid = n_grid
        self.mode = mode
        self.stat = stat
        self.delta = delta
        self.threshold = threshold
        self.metric = metric
        self.input_type = input_type
        self.missing_value = missing_value
        self.abs_tol = abs_tol
        self.rel_tol = rel_tol
        self.jobs = jobs

    def _distance_matrices(self, X) -> list[np.ndarray]:
        if isinstance(X, np.ndarray) and X.ndim == 2:
            X = [X]
        if self.input_type == "distances":
            return [check_distance_matrix(x) for x in X]
        if self.input_type != "points":
            raise ValueError(f"input_type must be 'points' or 'distances', got {self.input_type!r}")
        return [point_cloud_distances(x, metric=self.metric) for x in X]

    def fit(self, X, y=None):
        if self.mode not in ("all_pairs", "diagonal", "fixed_delta"):
            raise ValueError(
                f"mode must be all_pairs, diagonal, or fixed_delta, got {self.mode!r}")
        if self.mode == "fixed_delta" and (self.delta is None or self.delta <= 0):
            raise ValueError("fixed_delta mode requires delta > 0")
        if self.dim < 0 or self.max_dim < self.dim:
            raise ValueError(f"need 0 <= dim <= max_dim, got dim={self.dim}, max_dim={self.max_dim}")
        mats = self._distance_matrices(X)
        if self.grid is not None:
            values = np.asarray(self.grid, dtype=np.float64).reshape(-1)
            if values.size == 0 or np.any(np.diff(values) < 0):
                raise ValueError("grid must be nonempty and sorted ascending")
        else:
            pooled = np.concatenate([D[np.triu_indices_from(D, k=1)] for D in mats])
            if self.threshold is not None:
                pooled = pooled[pooled <= self.threshold]
            if pooled.size == 0:
                raise ValueError("no pairwise distances available to learn a grid")
            values = np.unique(np.quantile(pooled, np.linspace(0, 1, self.n_grid)))
        self.grid_values_ = values
        m = values.size
        self.n_features_out_ = m * (m + 1) // 2 if self.mode == "all_pairs" else m
        return self

    def _vectorize(self, D: np.ndarray) -> np.ndarray:
        fc = rips(D, self.max_dim,
                  np.inf if self.threshold is None else self.threshold)
        policy = ZeroPolicy(self.abs_tol, self.rel_tol)
        kw = dict(stat=self.stat, policy=policy, jobs=self.jobs)
        if self.mode == "all_pairs":
            grid = all_pairs_grid(fc, self.dim, self.grid_values_, **kw)
        elif self.mode == "diagonal":
            grid = family_diagonal(fc, self.dim, self.grid_values_, **kw)
        else:
            grid = family_fixed_delta(fc, self.dim, self.grid_values_, self.delta, **kw)
        return np.array([self.missing_value if c.missing else c.value
                         for c in grid.cells], dtype=np.float64)

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "grid_values_")
        rows = [self._vectorize(D) for D in self._distance_matrices(X)]
        out = np.vstack(rows) if rows else np.empty((0, self.n_features_out_))
        return out

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        check_is_fitted(self, "grid_values_")
        v = self.grid_values_
        if self.mode == "all_pairs":
            labels = [(v[i], v[j]) for i in range(v.size) for j in range(i, v.size)]
        elif self.mode == "diagonal":
            labels = [(x, x) for x in v]
        else:
            labels = [(x, x + self.delta) for x in v]
        return np.array(
            [f"d{self.dim}_{self.stat}_a{a:g}_b{b:g}" for a, b in labels], dtype=object)
