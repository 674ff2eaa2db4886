import numpy as np
import pytest
from scipy.spatial.distance import pdist, squareform

from perslap import (
    FilteredComplex,
    down_laplacian,
    eig_full_symmetric,
    persistent_betti,
    persistent_betti_rank_oracle,
    rips,
    up_laplacian_oracle,
    up_laplacian_schur,
)
from perslap.spectra import matrix_rank

# 4-cycle 1-2-4-3 with the extra edge 1-4 and the triangle on {1,3,4};
# edge columns ordered 12, 13, 14, 24, 34
DIAMOND_D1 = np.array([
    [-1, -1, -1, 0, 0],
    [1, 0, 0, -1, 0],
    [0, 1, 0, 0, -1],
    [0, 0, 1, 1, 1],
])
DIAMOND_D2 = np.array([[0], [1], [-1], [0], [1]])


@pytest.fixture
def diamond():
    """Unfiltered: everything at 0, one of the two triangles filled."""
    return FilteredComplex([DIAMOND_D1, DIAMOND_D2], [[0] * 4, [0] * 5, [0]])


@pytest.fixture
def diamond_two_faces():
    """Same 1-skeleton; the second triangle {1,2,4} enters at t=1."""
    d2 = np.array([[0, 1], [1, 0], [-1, -1], [0, 1], [1, 0]])
    return FilteredComplex([DIAMOND_D1, d2], [[0] * 4, [0] * 5, [0, 1]])


@pytest.fixture
def diamond_filtered():
    """Vertices at 0, edges at 1, triangle at 2."""
    return FilteredComplex([DIAMOND_D1, DIAMOND_D2], [[0] * 4, [1] * 5, [2]])


@pytest.fixture
def filtered_triangle():
    """Three vertices at 0, edges at 0.1/0.2/0.2, face at 1.4."""
    return FilteredComplex(
        [np.array([[-1, -1, 0], [1, 0, -1], [0, 1, 1]]), np.array([[1], [-1], [1]])],
        [[0, 0, 0], [0.1, 0.2, 0.2], [1.4]])


@pytest.fixture
def path_graph():
    """v0, v1 at 0 and v2 at 1; both edges at 1."""
    return FilteredComplex([np.array([[-1, 0], [1, -1], [0, 1]])],
                           [[0, 0, 1], [1, 1]])


@pytest.fixture(scope="session")
def rips_corpus():
    """50 random Rips complexes, max_dim 3: mostly 4-7 points at full
    threshold plus a few larger thresholded ones (up to 12 points)."""
    rng = np.random.default_rng(20260823)
    out = []
    for i in range(50):
        big = i >= 46
        k = int(rng.integers(8, 13)) if big else int(rng.integers(4, 8))
        pts = rng.random((k, int(rng.integers(2, 4))))
        D = squareform(pdist(pts))
        thr = np.quantile(D[np.triu_indices(k, 1)], 0.35) if big else np.inf
        out.append(rips(D, 3, thr))
    return out


def direct_laplacian(fc, n, a):
    """Dense one-level combinatorial Laplacian straight from the sliced
    boundaries, no Schur machinery."""
    d = fc.count_at(n, a)
    L = np.zeros((d, d))
    if n >= 1:
        B = fc.boundary_at(n, a).toarray().astype(float)
        L += B.T @ B
    if n < fc.max_dim:
        C = fc.boundary_at(n + 1, a).toarray().astype(float)
        L += C @ C.T
    return L


@pytest.fixture(scope="session")
def corpus_scan(rips_corpus):
    """Every (n, a, b) cell of every corpus complex, reduced to the scalars
    the cross-checks need: route agreement, both Betti counts, ranks."""
    records = []
    for ci, fc in enumerate(rips_corpus):
        grid = fc.filtration_grid()
        for n in range(fc.max_dim + 1):
            for i, a in enumerate(grid):
                for b in grid[i:]:
                    up_s = up_laplacian_schur(fc, n, a, b)
                    up_o = up_laplacian_oracle(fc, n, a, b)
                    down = down_laplacian(fc, n, a)
                    L = up_s + down
                    s = eig_full_symmetric(L)
                    rec = {
                        "complex": ci, "n": n, "a": float(a), "b": float(b),
                        "dim_cells": L.shape[0],
                        "schur_null_diff": float(np.abs(up_s - up_o).max()) if up_s.size else 0.0,
                        "betti_eig": persistent_betti(s),
                        "betti_oracle": persistent_betti_rank_oracle(fc, n, a, b),
                        "rank_L": matrix_rank(L),
                        "rank_up": matrix_rank(up_s),
                        "rank_down": matrix_rank(down),
                    }
                    if a == b:
                        rec["direct_diff"] = float(
                            np.abs(L - direct_laplacian(fc, n, a)).max()) if L.size else 0.0
                    records.append(rec)
    return records
