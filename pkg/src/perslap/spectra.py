"""Eigenvalue extraction, zero thresholds, and spectral summaries.

Two independent routes to Betti numbers live here on purpose: counting
near-zero eigenvalues of an assembled Laplacian (:func:`persistent_betti`)
and pure boundary-rank arithmetic that never sees a Laplacian
(:func:`persistent_betti_rank_oracle`).  Tests hold them against each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from .complexes import FilteredComplex

__all__ = [
    "ZeroPolicy",
    "EigOptions",
    "Spectrum",
    "SummaryUnavailable",
    "STATS",
    "zero_threshold",
    "eig_full_symmetric",
    "eig_extremal",
    "compute_spectrum",
    "persistent_betti",
    "persistent_betti_rank_oracle",
    "spectral_gap",
    "summarize",
    "matrix_rank",
]

STATS = ("min_nonzero", "max", "mean_nonzero", "betti", "count")


@dataclass(frozen=True)
class ZeroPolicy:
    """Threshold below which an eigenvalue counts as zero.

    tau = abs_tol + rel_tol * max(0, largest eigenvalue); the relative term
    uses the largest eigenvalue of the same spectrum so the cutoff scales
    with the matrix.
    """

    abs_tol: float = 1e-8
    rel_tol: float = 1e-10

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be non-negative")


DEFAULT_ZERO_POLICY = ZeroPolicy()


def zero_threshold(values, policy: ZeroPolicy | None = None) -> float:
    policy = policy or DEFAULT_ZERO_POLICY
    values = np.asarray(values, dtype=np.float64)
    top = float(values.max()) if values.size else 0.0
    return policy.abs_tol + policy.rel_tol * max(0.0, top)


@dataclass(frozen=True)
class EigOptions:
    """Solver selection: full dense, or iterative extremal-k."""

    mode: Literal["full", "k_smallest", "k_largest"] = "full"
    k: int = 10
    tol: float = 1e-6
    subspace_dim: int | None = None
    max_iter: int = 1000

    def __post_init__(self):
        if self.mode not in ("full", "k_smallest", "k_largest"):
            raise ValueError(f"unknown solver mode {self.mode!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.subspace_dim is not None and self.subspace_dim <= self.k:
            raise ValueError("subspace_dim must exceed k")

    @property
    def ncv(self) -> int:
        # the usual 2k+1 recommendation stalls on clustered spectra; go wider
        return self.subspace_dim if self.subspace_dim is not None else max(2 * self.k + 1, 6 * self.k)


@dataclass(frozen=True)
class Spectrum:
    """Sorted eigenvalues of a d-dimensional symmetric matrix.

    ``mode`` records which part of the spectrum ``values`` covers; ``size``
    is the ambient dimension d, so ``len(values) < size`` marks a partial
    spectrum.  ``fallback`` is set when an iterative solve was replaced by
    the full solver.
    """

    values: np.ndarray
    size: int
    mode: Literal["full", "smallest", "largest"] = "full"
    fallback: bool = False

    def __post_init__(self):
        vals = np.sort(np.asarray(self.values, dtype=np.float64).reshape(-1))
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.size < vals.size:
            raise ValueError(f"{vals.size} eigenvalues for a size-{self.size} matrix")
        if self.mode == "full" and vals.size != self.size:
            raise ValueError("full-mode spectrum must carry all eigenvalues")

    @property
    def is_full(self) -> bool:
        return self.values.size == self.size

    def __len__(self) -> int:
        return self.values.size


class SummaryUnavailable(ValueError):
    """The requested statistic does not exist for this spectrum."""


def _as_dense_symmetric(M) -> np.ndarray:
    if sp.issparse(M):
        M = M.toarray()
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.array_equal(M, M.T):
        raise ValueError("matrix is not exactly symmetric")
    return M


def _diagonal_values(M: np.ndarray) -> np.ndarray | None:
    """Diagonal of M if every off-diagonal entry is exactly zero, else None."""
    d = np.diag(M).copy()
    off = M.copy()
    np.fill_diagonal(off, 0)
    return d if not off.any() else None


def eig_full_symmetric(M) -> Spectrum:
    """All eigenvalues of an exactly-symmetric matrix, ascending.

    Structurally diagonal matrices (exact zero off-diagonal, no tolerance)
    skip the eigensolver and return the sorted diagonal.
    """
    M = _as_dense_symmetric(M)
    d = M.shape[0]
    if d == 0:
        return Spectrum(np.empty(0), 0)
    diag = _diagonal_values(M)
    if diag is not None:
        return Spectrum(np.sort(diag), d)
    return Spectrum(scipy.linalg.eigvalsh(M), d)


def eig_extremal(M, opts: EigOptions, policy: ZeroPolicy | None = None) -> Spectrum:
    """k extremal eigenvalues via restarted Lanczos, with a dense fallback.

    The smallest-mode uses shift-invert about a slightly negative shift so
    zero eigenvalues do not make the shifted operator singular.  Whenever
    the iteration cannot run or does not converge, the result comes from
    :func:`eig_full_symmetric` instead, with ``fallback`` set — never a
    silently wrong partial answer.
    """
    M = _as_dense_symmetric(M)
    d = M.shape[0]
    k = opts.k
    mode = "smallest" if opts.mode == "k_smallest" else "largest"
    if opts.mode == "full":
        raise ValueError("eig_extremal needs mode k_smallest or k_largest")

    def fallback() -> Spectrum:
        vals = eig_full_symmetric(M).values
        part = vals[:k] if mode == "smallest" else vals[max(0, d - k):]
        return Spectrum(part, d, mode, fallback=True)

    ncv = min(opts.ncv, d)
    if k >= d or ncv <= k or d < 3:
        return fallback()
    diag = _diagonal_values(M)
    if diag is not None:
        vals = np.sort(diag)
        part = vals[:k] if mode == "smallest" else vals[d - k:]
        return Spectrum(part, d, mode)
    try:
        if mode == "smallest":
            policy = policy or DEFAULT_ZERO_POLICY
            shift = -(policy.abs_tol + policy.rel_tol * max(0.0, float(np.max(np.diag(M)))))
            vals = eigsh(M, k=k, sigma=shift, which="LM", ncv=ncv,
                         maxiter=opts.max_iter, tol=opts.tol,
                         return_eigenvectors=False)
        else:
            vals = eigsh(M, k=k, which="LA", ncv=ncv,
                         maxiter=opts.max_iter, tol=opts.tol,
                         return_eigenvectors=False)
    except (ArpackNoConvergence, ArpackError, np.linalg.LinAlgError,
            scipy.linalg.LinAlgError, RuntimeError):
        return fallback()
    return Spectrum(np.sort(vals), d, mode)


def compute_spectrum(M, opts: EigOptions | None = None,
                     policy: ZeroPolicy | None = None) -> Spectrum:
    """Dispatch on solver mode; ``opts=None`` means the full solver."""
    if opts is None or opts.mode == "full":
        return eig_full_symmetric(M)
    return eig_extremal(M, opts, policy)


def _certified_below(s: Spectrum, tau: float) -> int:
    """Count eigenvalues < tau, or raise if the partial view cannot know."""
    below = int(np.count_nonzero(s.values < tau))
    if s.is_full:
        return below
    if s.mode == "smallest" and below < len(s):
        # the partial window extends past the zero cluster
        return below
    raise ValueError(
        f"partial {s.mode}-mode spectrum ({len(s)} of {s.size}) cannot "
        "certify the zero-eigenvalue count")


def persistent_betti(s: Spectrum, tau: float | None = None,
                     policy: ZeroPolicy | None = None) -> int:
    """Multiplicity of (near-)zero eigenvalues.

    Partial spectra are accepted only when they certify the count: a
    smallest-mode window that contains at least one value >= tau.
    """
    if tau is None:
        tau = zero_threshold(s.values, policy)
    return _certified_below(s, tau)


def spectral_gap(s: Spectrum, tau: float | None = None,
                 policy: ZeroPolicy | None = None) -> float | None:
    """Least eigenvalue >= tau, or None when no such eigenvalue exists."""
    if tau is None:
        tau = zero_threshold(s.values, policy)
    nonzero = s.values[s.values >= tau]
    if nonzero.size:
        if s.is_full or s.mode == "smallest":
            return float(nonzero[0])
        raise ValueError("largest-mode partial spectrum cannot locate the gap")
    if s.is_full:
        return None
    raise ValueError(f"partial {s.mode}-mode spectrum found no nonzero eigenvalue")


def summarize(s: Spectrum, stat: str, tau: float | None = None,
              policy: ZeroPolicy | None = None) -> float:
    """One scalar summary of a spectrum.

    Raises :class:`SummaryUnavailable` when the statistic does not exist
    (no nonzero eigenvalues for min/mean, empty spectrum for max) and
    ValueError when a partial spectrum cannot support the statistic.
    """
    if stat not in STATS:
        raise ValueError(f"unknown stat {stat!r}; choose from {STATS}")
    if tau is None:
        tau = zero_threshold(s.values, policy)
    if stat == "count":
        return float(s.size)
    if stat == "betti":
        return float(_certified_below(s, tau))
    if stat == "max":
        if not (s.is_full or s.mode == "largest"):
            raise ValueError("max needs a full or largest-mode spectrum")
        if len(s) == 0:
            raise SummaryUnavailable("empty spectrum has no maximum")
        return float(s.values[-1])
    nonzero = s.values[s.values >= tau]
    if stat == "min_nonzero":
        gap = spectral_gap(s, tau)
        if gap is None:
            raise SummaryUnavailable("no nonzero eigenvalues")
        return gap
    # mean_nonzero: needs every nonzero eigenvalue
    if not s.is_full:
        raise ValueError("mean_nonzero needs the full spectrum")
    if not nonzero.size:
        raise SummaryUnavailable("no nonzero eigenvalues")
    return float(nonzero.mean())


def matrix_rank(M, policy: ZeroPolicy | None = None) -> int:
    """Rank by singular values, thresholded on sigma^2.

    Squared singular values are eigenvalues of the Gram matrix, so applying
    the eigenvalue zero threshold to them keeps rank decisions consistent
    with zero-eigenvalue counts.
    """
    if sp.issparse(M):
        M = M.toarray()
    M = np.asarray(M, dtype=np.float64)
    if min(M.shape) == 0:
        return 0
    sq = scipy.linalg.svdvals(M) ** 2
    return int(np.count_nonzero(sq >= zero_threshold(sq, policy)))


def persistent_betti_rank_oracle(fc: FilteredComplex, n: int, a: float, b: float,
                                 policy: ZeroPolicy | None = None) -> int:
    """Betti number across (a, b) from boundary ranks alone.

    nullity(B_n at a) minus the rank contribution of (n+1)-cells at b whose
    boundaries land in the level-a chain space; no Laplacian is assembled.
    """
    if b < a:
        raise ValueError(f"need a <= b, got a={a}, b={b}")
    fc._check_dim(n)
    na = fc.count_at(n, a)
    if na == 0:
        return 0
    if n == 0:
        nullity = na
    else:
        nullity = na - matrix_rank(fc.boundary_at(n, a), policy)
    if n == fc.max_dim:
        return nullity
    Bb = fc.boundary_at(n + 1, b)
    return nullity - (matrix_rank(Bb, policy) - matrix_rank(Bb[na:, :], policy))
