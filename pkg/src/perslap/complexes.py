"""Filtered chain complexes stored as boundary matrices plus filtration values.

A complex of top dimension ``N`` is a sequence of boundary matrices
``B_1, ..., B_N`` together with one filtration array per dimension.  ``B_n``
has one row per (n-1)-cell and one column per n-cell; cells within a
dimension are ordered by filtration value, so the sub-complex alive at level
``a`` is always a leading block of each matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = ["FilteredComplex", "ValidationReport", "Violation"]

#: |B_n B_{n+1}| tolerance for float-valued boundaries (integer ones are
#: checked exactly).
_CHAIN_TOL = 1e-10


class Violation(NamedTuple):
    rule: str
    location: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(f"[{v.rule}] {v.location}: {v.message}" for v in self.violations)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _as_boundary(mat: Any) -> sp.csc_array:
    """Coerce to csc with a concrete dtype; integer input stays integer."""
    if sp.issparse(mat):
        out = sp.csc_array(mat)
    else:
        dense = np.asarray(mat)
        if dense.ndim != 2:
            raise ValueError(f"boundary matrix must be 2-D, got shape {dense.shape}")
        out = sp.csc_array(dense)
    if not (np.issubdtype(out.dtype, np.integer) or np.issubdtype(out.dtype, np.floating)):
        raise ValueError(f"boundary dtype must be integer or float, got {out.dtype}")
    out.sum_duplicates()
    for buf in (out.data, out.indices, out.indptr):
        buf.setflags(write=False)
    return out


@dataclass(frozen=True)
class FilteredComplex:
    """Boundary matrices ``B_1..B_N`` and per-dimension filtration arrays.

    Parameters
    ----------
    boundaries : sequence of array-like or sparse
        ``boundaries[n-1]`` is ``B_n`` with shape (#(n-1)-cells, #n-cells).
        May be empty for a 0-dimensional complex.
    filtrations : sequence of array-like
        ``filtrations[n]`` holds one value per n-cell, expected sorted
        non-decreasing (checked by :meth:`validate`, not the constructor).
    """

    boundaries: tuple[sp.csc_array, ...]
    filtrations: tuple[np.ndarray, ...]

    def __init__(self, boundaries: Sequence[Any], filtrations: Sequence[Any]):
        bnds = tuple(_as_boundary(b) for b in boundaries)
        filts = tuple(_freeze(np.asarray(f, dtype=np.float64).reshape(-1)) for f in filtrations)
        if not filts:
            raise ValueError("need at least one filtration array (dimension 0)")
        if len(bnds) != len(filts) - 1:
            raise ValueError(
                f"{len(filts)} filtration arrays require {len(filts) - 1} "
                f"boundary matrices, got {len(bnds)}"
            )
        for n, b in enumerate(bnds, start=1):
            want = (filts[n - 1].size, filts[n].size)
            if b.shape != want:
                raise ValueError(f"B_{n} has shape {b.shape}, expected {want}")
        object.__setattr__(self, "boundaries", bnds)
        object.__setattr__(self, "filtrations", filts)

    # -- basic queries ----------------------------------------------------

    @property
    def max_dim(self) -> int:
        return len(self.filtrations) - 1

    def cell_counts(self) -> tuple[int, ...]:
        return tuple(f.size for f in self.filtrations)

    def count_at(self, n: int, a: float) -> int:
        """Number of n-cells with filtration value <= a."""
        self._check_dim(n)
        return int(np.searchsorted(self.filtrations[n], a, side="right"))

    def boundary_at(self, n: int, a: float) -> sp.csc_array:
        """B_n restricted to the sub-complex at level ``a``.

        Rows are the (n-1)-cells alive at ``a``, columns the n-cells; valid
        for n >= 1.
        """
        if n < 1 or n > self.max_dim:
            raise ValueError(f"boundary_at needs 1 <= n <= {self.max_dim}, got {n}")
        rows = self.count_at(n - 1, a)
        cols = self.count_at(n, a)
        return self.boundaries[n - 1][:rows, :cols]

    def filtration_grid(self, n: int | None = None) -> np.ndarray:
        """Sorted unique filtration values, for one dimension or all."""
        if n is None:
            vals = np.concatenate(self.filtrations) if self.filtrations else np.empty(0)
        else:
            self._check_dim(n)
            vals = self.filtrations[n]
        return np.unique(vals)

    def _check_dim(self, n: int) -> None:
        if not 0 <= n <= self.max_dim:
            raise ValueError(f"dimension {n} out of range [0, {self.max_dim}]")

    # -- validation -------------------------------------------------------

    def validate(self, strict_simplicial: bool = False) -> ValidationReport:
        """Check filtration sortedness, closure, and the chain condition.

        ``strict_simplicial`` additionally requires every column of ``B_n``
        to contain exactly n+1 entries, all equal to +-1.
        """
        bad: list[Violation] = []
        for n, f in enumerate(self.filtrations):
            if f.size and np.any(np.diff(f) < 0):
                i = int(np.argmax(np.diff(f) < 0))
                bad.append(Violation(
                    "sorted", f"dim {n}",
                    f"filtration decreases at index {i + 1} ({f[i]:g} -> {f[i + 1]:g})"))
        for n in range(1, self.max_dim + 1):
            b = self.boundaries[n - 1].tocoo()
            f_face, f_cell = self.filtrations[n - 1], self.filtrations[n]
            late = f_face[b.row] > f_cell[b.col]
            for r, c in zip(b.row[late], b.col[late]):
                bad.append(Violation(
                    "closure", f"B_{n}[{r},{c}]",
                    f"face enters at {f_face[r]:g}, after its coface at {f_cell[c]:g}"))
            if strict_simplicial:
                counts = np.diff(self.boundaries[n - 1].indptr)
                for c in np.flatnonzero(counts != n + 1):
                    bad.append(Violation(
                        "strict", f"B_{n} column {c}",
                        f"{counts[c]} boundary entries, expected {n + 1}"))
                if b.data.size and (not np.issubdtype(b.data.dtype, np.integer)
                                    or np.any(np.abs(b.data) != 1)):
                    bad.append(Violation(
                        "strict", f"B_{n}", "entries must be integers +-1"))
        for n in range(1, self.max_dim):
            prod = self.boundaries[n - 1] @ self.boundaries[n]
            if np.issubdtype(prod.dtype, np.integer):
                prod.eliminate_zeros()
                nz = prod.nnz
            else:
                nz = int(np.count_nonzero(np.abs(prod.toarray()) > _CHAIN_TOL))
            if nz:
                bad.append(Violation(
                    "chain", f"B_{n} B_{n + 1}",
                    f"product has {nz} nonzero entries"))
        return ValidationReport(tuple(bad))

    # -- spectra convenience ---------------------------------------------

    def spectra(self, dim: int, a: float, b: float | None = None, **options) -> np.ndarray:
        """Eigenvalues of the persistent Laplacian in ``dim`` across (a, b).

        ``b`` defaults to ``a`` (the ordinary Laplacian at one level).  Extra
        keyword options are forwarded to the eigensolver.  Returns the sorted
        eigenvalue array.
        """
        from .laplacians import persistent_laplacian
        from .spectra import EigOptions, compute_spectrum

        L = persistent_laplacian(self, dim, a, a if b is None else b)
        opts = EigOptions(**options) if options else None
        return compute_spectrum(L, opts).values

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"max_dim": self.max_dim, "boundaries": [], "filtrations": []}
        for b in self.boundaries:
            coo = b.tocoo()
            order = np.lexsort((coo.row, coo.col))
            trip = [[int(coo.row[i]), int(coo.col[i]), coo.data[i].item()] for i in order]
            out["boundaries"].append(
                {"rows": int(b.shape[0]), "cols": int(b.shape[1]), "triplets": trip})
        out["filtrations"] = [[float(x) for x in f] for f in self.filtrations]
        return out

    def to_json(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def from_dict(cls, doc: dict) -> "FilteredComplex":
        try:
            filts = doc["filtrations"]
            raw = doc["boundaries"]
        except KeyError as exc:
            raise ValueError(f"complex document missing key {exc}") from None
        mats = []
        for k, entry in enumerate(raw):
            rows, cols = int(entry["rows"]), int(entry["cols"])
            if "dense" in entry:
                m = np.asarray(entry["dense"])
                if m.size == 0:
                    m = m.reshape(rows, cols)
                if m.shape != (rows, cols):
                    raise ValueError(
                        f"boundary {k}: dense block shape {m.shape} != ({rows}, {cols})")
                mats.append(m)
                continue
            trip = entry.get("triplets", [])
            data = [t[2] for t in trip]
            dtype = np.int64 if all(isinstance(v, int) for v in data) else np.float64
            r = np.array([t[0] for t in trip], dtype=np.int64)
            c = np.array([t[1] for t in trip], dtype=np.int64)
            if trip and (r.max() >= rows or c.max() >= cols or r.min() < 0 or c.min() < 0):
                raise ValueError(f"boundary {k}: triplet index out of bounds")
            mats.append(sp.csc_array(
                (np.array(data, dtype=dtype), (r, c)), shape=(rows, cols)))
        fc = cls(mats, filts)
        if "max_dim" in doc and int(doc["max_dim"]) != fc.max_dim:
            raise ValueError(
                f"declared max_dim {doc['max_dim']} != {fc.max_dim} filtration arrays - 1")
        return fc

    @classmethod
    def from_json(cls, path: str) -> "FilteredComplex":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
