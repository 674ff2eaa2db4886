"""Families of persistent Laplacian spectra over a filtration grid.

A family picks (a, b) pairs from a value grid, computes one spectrum per
pair, and optionally reduces each to a scalar summary.  Cells are evaluated
row-major and may run on a bounded thread pool; emitted order never depends
on scheduling.  Undefined summaries (no nonzero eigenvalues, empty spectrum)
become explicitly-missing cells rather than zeros.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .complexes import FilteredComplex
from .laplacians import (
    harmonic_reduction,
    persistent_laplacian,
    top_dim_spectrum_flipped,
)
from .spectra import (
    STATS,
    EigOptions,
    Spectrum,
    SummaryUnavailable,
    ZeroPolicy,
    compute_spectrum,
    persistent_betti_rank_oracle,
    summarize,
)

__all__ = [
    "GridCell",
    "SpectralGrid",
    "grid_pairs",
    "evaluate_family",
    "family_fixed_delta",
    "family_consecutive",
    "family_diagonal",
    "all_pairs_grid",
    "default_jobs",
]


def default_jobs() -> int:
    env = os.environ.get("PERSLAP_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"PERSLAP_JOBS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


@dataclass(frozen=True)
class GridCell:
    """One (a, b) entry: spectrum and/or summary value, or a missing marker."""

    i: int
    j: int
    a: float
    b: float
    spectrum: Spectrum | None = None
    value: float | None = None
    reason: str | None = None

    @property
    def missing(self) -> bool:
        return self.reason is not None


@dataclass
class SpectralGrid:
    dim: int
    mode: str
    stat: str | None
    values: np.ndarray
    cells: list[GridCell]

    def entries(self) -> dict[tuple[float, float], GridCell]:
        return {(c.a, c.b): c for c in self.cells}

    def write_csv(self, fh) -> None:
        """Summary grids: ``a,b,value`` rows; raw grids:
        ``dim,a,b,index,eigenvalue`` rows.  Missing cells are omitted;
        floats use shortest round-trip formatting.
        """
        if self.stat is None:
            fh.write("dim,a,b,index,eigenvalue\n")
            for c in self.cells:
                if c.missing or c.spectrum is None:
                    continue
                for idx, lam in enumerate(c.spectrum.values):
                    fh.write(f"{self.dim},{c.a!r},{c.b!r},{idx},{float(lam)!r}\n")
        else:
            fh.write("a,b,value\n")
            for c in self.cells:
                if c.missing or c.value is None:
                    continue
                fh.write(f"{c.a!r},{c.b!r},{c.value!r}\n")

    def to_dict(self) -> dict:
        doc = {
            "dim": self.dim,
            "mode": self.mode,
            "stat": self.stat,
            "values": [float(v) for v in self.values],
            "cells": [],
        }
        for c in self.cells:
            entry: dict = {"i": c.i, "j": c.j, "a": c.a, "b": c.b}
            if self.stat is None:
                if c.spectrum is None:
                    entry["eigenvalues"] = None
                else:
                    entry["eigenvalues"] = [float(x) for x in c.spectrum.values]
                    entry["size"] = c.spectrum.size
                    entry["solver_mode"] = c.spectrum.mode
                    entry["fallback"] = c.spectrum.fallback
            else:
                entry["value"] = c.value if not c.missing else None
            entry["reason"] = c.reason
            doc["cells"].append(entry)
        return doc


def _basis_for(bases, a: float, b: float):
    if bases is None:
        return None
    if callable(bases):
        return bases(a, b)
    for (ka, kb), mat in bases.items():
        if np.isclose(ka, a, rtol=1e-9, atol=1e-12) and np.isclose(kb, b, rtol=1e-9, atol=1e-12):
            return mat
    return None


def _evaluate(fc: FilteredComplex, n: int, mode: str, values: np.ndarray,
              pairs: list[tuple[int, int, float, float]], stat: str | None,
              *, eig: EigOptions | None = None, policy: ZeroPolicy | None = None,
              jobs: int | None = 1, flip: bool = False, kernel_bases=None,
              up_fn=None, dtype=np.float64,
              prescreen_max_betti: int | None = None) -> SpectralGrid:
    if stat is not None and stat not in STATS:
        raise ValueError(f"unknown stat {stat!r}; choose from {STATS}")

    def cell(item: tuple[int, int, float, float]) -> GridCell:
        i, j, a, b = item
        if prescreen_max_betti is not None:
            beta = persistent_betti_rank_oracle(fc, n, a, b, policy)
            if beta > prescreen_max_betti:
                return GridCell(i, j, a, b,
                                reason=f"betti {beta} above pre-screen bound "
                                       f"{prescreen_max_betti}")
        if flip:
            if n < fc.max_dim and fc.count_at(n + 1, b) > 0:
                raise ValueError(
                    f"dimension {n} is not top at level {b:g}; cannot flip")
            if fc.count_at(n, a) == 0:
                raise ValueError(
                    f"no dimension-{n} cells at level {a:g}; nothing to flip")
            spectrum = top_dim_spectrum_flipped(fc, n, a, policy, dtype)
        elif kernel_bases is not None:
            L = persistent_laplacian(fc, n, a, b, up_fn=up_fn, dtype=dtype)
            N = _basis_for(kernel_bases, a, b)
            if N is None:
                N = np.zeros((L.shape[0], 0))
            reduced = harmonic_reduction(L, N)
            spectrum = compute_spectrum(reduced, eig, policy)
        else:
            use = eig
            if stat == "betti" and eig is not None and eig.mode != "full":
                # a partial window certifies the zero count only past it
                beta = persistent_betti_rank_oracle(fc, n, a, b, policy)
                if eig.mode != "k_smallest" or eig.k <= beta:
                    use = None
            L = persistent_laplacian(fc, n, a, b, up_fn=up_fn, dtype=dtype)
            spectrum = compute_spectrum(L, use, policy)
        if stat is None:
            return GridCell(i, j, a, b, spectrum=spectrum)
        try:
            value = summarize(spectrum, stat, policy=policy)
        except SummaryUnavailable as exc:
            return GridCell(i, j, a, b, spectrum=spectrum, reason=str(exc))
        return GridCell(i, j, a, b, spectrum=spectrum, value=value)

    jobs = default_jobs() if jobs is None else max(1, jobs)
    if jobs == 1 or len(pairs) <= 1:
        cells = [cell(p) for p in pairs]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(cell, pairs))
    return SpectralGrid(n, mode, stat, np.asarray(values, dtype=np.float64), cells)


def grid_pairs(fc: FilteredComplex, mode: str, values=None,
               delta: float | None = None) -> tuple[np.ndarray, list[tuple[int, int, float, float]]]:
    """(values, (i, j, a, b) work items) for one family mode, row-major."""
    if mode == "consecutive":
        if values is not None:
            raise ValueError("consecutive mode derives its grid from the complex")
        grid = fc.filtration_grid()
        if grid.size < 2:
            raise ValueError(
                f"consecutive mode needs >= 2 distinct filtration values, "
                f"found {grid.size}")
        return grid, [(i, i + 1, float(grid[i]), float(grid[i + 1]))
                      for i in range(grid.size - 1)]
    if mode == "diagonal" and values is None:
        values = fc.filtration_grid()
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise ValueError("values must be nonempty")
    if np.any(np.diff(values) < 0):
        raise ValueError("values must be sorted ascending")
    if mode == "diagonal":
        return values, [(i, i, float(v), float(v)) for i, v in enumerate(values)]
    if mode == "fixed_delta":
        if delta is None or delta <= 0:
            raise ValueError(f"fixed_delta mode needs delta > 0, got {delta}")
        grid = fc.filtration_grid()
        top = float(grid[-1]) if grid.size else float(values.max())
        return values, [(i, i, float(v), max(float(v), min(float(v) + delta, top)))
                        for i, v in enumerate(values)]
    if mode == "all_pairs":
        return values, [(i, j, float(values[i]), float(values[j]))
                        for i in range(values.size) for j in range(i, values.size)]
    raise ValueError(f"unknown family mode {mode!r}")


def evaluate_family(fc: FilteredComplex, n: int, mode: str, values=None,
                    delta: float | None = None, stat: str | None = None,
                    **opts) -> SpectralGrid:
    """One-call dispatcher over the four family modes."""
    values, pairs = grid_pairs(fc, mode, values, delta)
    return _evaluate(fc, n, mode, values, pairs, stat, **opts)


def family_fixed_delta(fc: FilteredComplex, n: int, values, delta: float,
                       stat: str | None = None, **opts) -> SpectralGrid:
    """Entries (b_i, b_i + delta); the upper level clamps to the last
    filtration value so oversized deltas read the full complex."""
    values, pairs = grid_pairs(fc, "fixed_delta", values, delta)
    return _evaluate(fc, n, "fixed_delta", values, pairs, stat, **opts)


def family_consecutive(fc: FilteredComplex, n: int,
                       stat: str | None = None, **opts) -> SpectralGrid:
    """Entries (a_i, a_{i+1}) over consecutive distinct filtration values."""
    grid, pairs = grid_pairs(fc, "consecutive")
    return _evaluate(fc, n, "consecutive", grid, pairs, stat, **opts)


def family_diagonal(fc: FilteredComplex, n: int, values=None,
                    stat: str | None = None, **opts) -> SpectralGrid:
    """Ordinary (no-persistence) spectra at each grid value."""
    values, pairs = grid_pairs(fc, "diagonal", values)
    return _evaluate(fc, n, "diagonal", values, pairs, stat, **opts)


def all_pairs_grid(fc: FilteredComplex, n: int, values,
                   stat: str | None = None, **opts) -> SpectralGrid:
    """Upper-triangular grid over all value pairs b_i <= b_j."""
    values, pairs = grid_pairs(fc, "all_pairs", values)
    return _evaluate(fc, n, "all_pairs", values, pairs, stat, **opts)
