"""Persistent spectral analysis of filtered chain complexes.

Build filtered complexes (Vietoris-Rips, directed flag, Dowker), assemble
persistent Laplacians across filtration levels, extract eigenvalue spectra
with dense or iterative solvers, and reduce families of spectra to summary
grids or scikit-learn feature vectors.
"""

from .complexes import FilteredComplex, ValidationReport, Violation
from .builders import (
    FilteredDigraph,
    directed_flag,
    dowker_pair,
    dowker_sink,
    dowker_source,
    rips,
)
from .laplacians import (
    down_laplacian,
    harmonic_reduction,
    kernel_basis,
    persistent_laplacian,
    top_dim_spectrum_flipped,
    up_laplacian_oracle,
    up_laplacian_schur,
)
from .spectra import (
    EigOptions,
    Spectrum,
    SummaryUnavailable,
    ZeroPolicy,
    compute_spectrum,
    eig_extremal,
    eig_full_symmetric,
    persistent_betti,
    persistent_betti_rank_oracle,
    spectral_gap,
    summarize,
    zero_threshold,
)
from .family import (
    GridCell,
    SpectralGrid,
    all_pairs_grid,
    evaluate_family,
    family_consecutive,
    family_diagonal,
    family_fixed_delta,
)
from .sheaves import (
    CellularSheaf,
    check_composition,
    persistent_sheaf_laplacian,
    sheaf_coboundary,
    weighted_complex,
)
from .estimators import PersistentLaplacianGrid

__version__ = "0.1.0"

__all__ = [
    "FilteredComplex",
    "ValidationReport",
    "Violation",
    "FilteredDigraph",
    "rips",
    "directed_flag",
    "dowker_sink",
    "dowker_source",
    "dowker_pair",
    "down_laplacian",
    "up_laplacian_schur",
    "up_laplacian_oracle",
    "persistent_laplacian",
    "top_dim_spectrum_flipped",
    "harmonic_reduction",
    "kernel_basis",
    "Spectrum",
    "EigOptions",
    "ZeroPolicy",
    "SummaryUnavailable",
    "eig_full_symmetric",
    "eig_extremal",
    "compute_spectrum",
    "zero_threshold",
    "persistent_betti",
    "persistent_betti_rank_oracle",
    "spectral_gap",
    "summarize",
    "GridCell",
    "SpectralGrid",
    "evaluate_family",
    "family_fixed_delta",
    "family_consecutive",
    "family_diagonal",
    "all_pairs_grid",
    "CellularSheaf",
    "sheaf_coboundary",
    "check_composition",
    "weighted_complex",
    "persistent_sheaf_laplacian",
    "PersistentLaplacianGrid",
    "__version__",
]
