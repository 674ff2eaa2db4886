"""Persistent Laplacians of filtered chain complexes.

The persistent Laplacian across levels a <= b acts on the n-chains alive at
``a``: its down part is the ordinary B_n^T B_n there, and its up part
restricts the level-b up-Laplacian to chains whose (n+1)-coboundary data is
compatible with level a.  Two independent constructions of the up part are
provided — a Schur complement on the level-b up-Laplacian and an explicit
null-space basis — and tests hold them against each other.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .complexes import FilteredComplex
from .spectra import Spectrum, ZeroPolicy, eig_full_symmetric, zero_threshold

__all__ = [
    "down_laplacian",
    "up_laplacian_schur",
    "up_laplacian_oracle",
    "persistent_laplacian",
    "top_dim_spectrum_flipped",
    "harmonic_reduction",
    "kernel_basis",
]


def _check_pair(a: float, b: float) -> None:
    if b < a:
        raise ValueError(f"need a <= b, got a={a}, b={b}")


def _sym(M: np.ndarray) -> np.ndarray:
    return (M + M.T) / 2


def down_laplacian(fc: FilteredComplex, n: int, a: float,
                   dtype=np.float64) -> np.ndarray:
    """B_n^T B_n on the n-chains at level ``a`` (zero matrix for n=0)."""
    fc._check_dim(n)
    na = fc.count_at(n, a)
    if n == 0:
        return np.zeros((na, na), dtype=dtype)
    B = fc.boundary_at(n, a).astype(dtype)
    return _sym((B.T @ B).toarray())


def up_laplacian_schur(fc: FilteredComplex, n: int, a: float, b: float,
                       dtype=np.float64) -> np.ndarray:
    """Persistent up-Laplacian on the n-chains at ``a`` via Schur complement.

    Start from the level-b up-Laplacian B_{n+1} B_{n+1}^T and eliminate the
    rows/columns of n-cells that enter after ``a``.  The pseudoinverse solve
    is a least-squares SVD solve, exact here because the coupling block's
    columns lie in the trailing block's range.
    """
    _check_pair(a, b)
    fc._check_dim(n)
    na = fc.count_at(n, a)
    if n == fc.max_dim or na == 0:
        return np.zeros((na, na), dtype=dtype)
    B = fc.boundary_at(n + 1, b).astype(dtype)
    up_b = _sym((B @ B.T).toarray())
    if na == up_b.shape[0]:
        return up_b
    A = up_b[:na, :na]
    coupling = up_b[:na, na:]
    trailing = up_b[na:, na:]
    Z, *_ = scipy.linalg.lstsq(trailing, up_b[na:, :na], lapack_driver="gelsd")
    return _sym(A - coupling @ Z)


def up_laplacian_oracle(fc: FilteredComplex, n: int, a: float, b: float,
                        dtype=np.float64) -> np.ndarray:
    """Persistent up-Laplacian built from an explicit chain-subspace basis.

    The (n+1)-chains at ``b`` whose boundary stays inside the level-a chain
    space are the null space of the late-row block of B_{n+1}; compressing
    the boundary onto that space gives the up-Laplacian directly.  Slower
    than the Schur route but independent of it, so it doubles as a
    cross-check.
    """
    _check_pair(a, b)
    fc._check_dim(n)
    na = fc.count_at(n, a)
    if n == fc.max_dim:
        return np.zeros((na, na), dtype=dtype)
    B = fc.boundary_at(n + 1, b).toarray().astype(dtype)
    if B.shape[1] == 0 or B.shape[0] == na:
        M = B[:na, :]
        return _sym(M @ M.T)
    Q = scipy.linalg.null_space(B[na:, :])
    M = B[:na, :] @ Q
    return _sym(M @ M.T)


def persistent_laplacian(fc: FilteredComplex, n: int, a: float,
                         b: float | None = None, up_fn=None,
                         dtype=np.float64) -> np.ndarray:
    """Persistent Laplacian across (a, b) on the n-chains at ``a``.

    ``b`` defaults to ``a``, giving the ordinary combinatorial Laplacian of
    the sub-complex.  ``up_fn`` swaps the up-part construction (default
    :func:`up_laplacian_schur`).
    """
    if b is None:
        b = a
    up = (up_fn or up_laplacian_schur)(fc, n, a, b, dtype=dtype)
    return up + down_laplacian(fc, n, a, dtype=dtype)


def top_dim_spectrum_flipped(fc: FilteredComplex, n: int, a: float,
                             policy: ZeroPolicy | None = None,
                             dtype=np.float64) -> Spectrum:
    """Top-dimension Laplacian spectrum via the smaller Gram product.

    In the top dimension the Laplacian is B_n^T B_n, whose nonzero spectrum
    equals that of B_n B_n^T.  When there are fewer rows than columns the
    row-side product is cheaper: its nonzero eigenvalues are kept and zeros
    are padded to the chain-space dimension.
    """
    fc._check_dim(n)
    if n < fc.max_dim and fc.count_at(n + 1, a) > 0:
        raise ValueError(
            f"dimension {n} is not top at level {a:g}: (n+1)-cells exist")
    c = fc.count_at(n, a)
    if n == 0 or c == 0:
        return Spectrum(np.zeros(c), c)
    B = fc.boundary_at(n, a).astype(dtype)
    r = B.shape[0]
    if c <= r:
        return eig_full_symmetric(_sym((B.T @ B).toarray()))
    flipped = eig_full_symmetric(_sym((B @ B.T).toarray()))
    nonzero = flipped.values[flipped.values >= zero_threshold(flipped.values, policy)]
    return Spectrum(np.concatenate([np.zeros(c - nonzero.size), nonzero]), c)


def harmonic_reduction(L, kernel, residual_tol: float = 1e-6) -> np.ndarray:
    """Compress a PSD matrix onto the orthogonal complement of its kernel.

    ``kernel`` is a (d, beta) matrix of claimed null vectors; they need not
    be normalized but must be independent.  Returns the (d-beta, d-beta)
    symmetric matrix whose eigenvalues are the nonzero eigenvalues of ``L``
    — positive definite exactly when the claimed kernel spans the whole
    null space.
    """
    L = np.asarray(L, dtype=np.float64)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {L.shape}")
    d = L.shape[0]
    N = np.asarray(kernel, dtype=np.float64)
    if N.size == 0:
        N = N.reshape(d, 0)
    if N.ndim != 2 or N.shape[0] != d:
        raise ValueError(f"kernel basis must have {d} rows, got shape {N.shape}")
    beta = N.shape[1]
    if beta == 0:
        return _sym(L.copy())
    if beta > d:
        raise ValueError("more kernel vectors than dimensions")
    scale = 1.0 + float(np.abs(L).max())
    if float(np.abs(L @ N).max()) > residual_tol * scale:
        raise ValueError("claimed kernel vectors are not annihilated by the matrix")
    Q, R, _ = scipy.linalg.qr(N, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag.min() <= 1e-12 * max(1.0, diag.max()):
        raise ValueError("kernel vectors are linearly dependent")
    full, _ = scipy.linalg.qr(Q)  # complete Q to an orthonormal basis
    X = full[:, beta:]
    return _sym(X.T @ L @ X)


def kernel_basis(L, policy: ZeroPolicy | None = None) -> np.ndarray:
    """Orthonormal basis of the near-null space of a symmetric matrix."""
    L = np.asarray(L, dtype=np.float64)
    vals, vecs = scipy.linalg.eigh(L)
    return vecs[:, vals < zero_threshold(vals, policy)]
