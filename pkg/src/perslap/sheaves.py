"""Scalar-stalk cellular sheaves over filtered simplicial complexes.

Each cell carries a one-dimensional stalk; a restriction scalar is attached
to every codim-1 incidence of the base complex (the identity on a cell is
implicit, never stored).  Coboundaries are the base's signed incidences
weighted by those scalars; transposing them back to chain convention lets
the ordinary persistent-Laplacian pipeline run unchanged on real-valued
matrices.  The assembly keeps one (row, column) slot per incidence, so a
later block-valued stalk only widens the slots.
"""

from __future__ import annotations

import json
import warnings

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .complexes import FilteredComplex, ValidationReport, Violation
from .laplacians import persistent_laplacian

__all__ = [
    "CellularSheaf",
    "sheaf_coboundary",
    "check_composition",
    "weighted_complex",
    "persistent_sheaf_laplacian",
    "sheaf_from_dict",
    "sheaf_to_dict",
    "load_sheaf_json",
    "is_sheaf_doc",
]

#: restriction key: (face dimension, face index, coface index)
RKey = tuple[int, int, int]


def _incidences(base: FilteredComplex):
    for n in range(1, base.max_dim + 1):
        coo = base.boundaries[n - 1].tocoo()
        for r, c, v in zip(coo.row, coo.col, coo.data):
            yield (n - 1, int(r), int(c)), int(np.sign(v))


@dataclass(frozen=True)
class CellularSheaf:
    """A strict simplicial base plus one scalar per codim-1 incidence.

    ``serial_restriction`` records that the rule producing the scalars was
    not safe for concurrent calls; scalars are materialized up front in a
    single thread either way, so downstream spectral code never re-invokes
    the rule.
    """

    base: FilteredComplex
    restrictions: dict[RKey, float]
    payload: tuple[np.ndarray, ...] | None = None
    serial_restriction: bool = False

    def __post_init__(self):
        report = self.base.validate(strict_simplicial=True)
        if not report.ok:
            raise ValueError(f"sheaf base is not a strict simplicial complex:\n{report}")
        keys = {k for k, _ in _incidences(self.base)}
        missing = keys - self.restrictions.keys()
        if missing:
            k = sorted(missing)[0]
            raise ValueError(
                f"missing restriction value for {len(missing)} incidences, "
                f"first: face {k[1]} (dim {k[0]}) <= coface {k[2]}")
        unknown = self.restrictions.keys() - keys
        if unknown:
            raise ValueError(f"restriction keys without incidence: {sorted(unknown)[:3]}")
        if self.payload is not None:
            pay = tuple(np.asarray(p, dtype=np.float64).reshape(-1) for p in self.payload)
            if tuple(p.size for p in pay) != self.base.cell_counts():
                raise ValueError("payload shape does not match cell counts")
            object.__setattr__(self, "payload", pay)

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, base: FilteredComplex) -> "CellularSheaf":
        """All restriction scalars 1; Laplacians reduce to the plain ones."""
        return cls(base, {k: 1.0 for k, _ in _incidences(base)})

    @classmethod
    def from_payload(cls, base: FilteredComplex, payload) -> "CellularSheaf":
        """restriction(face <= coface) = payload(coface) / payload(face).

        Quotients of a per-cell scalar are automatically
        composition-consistent (the products telescope).
        """
        pay = tuple(np.asarray(p, dtype=np.float64).reshape(-1) for p in payload)
        if any(np.any(p == 0) for p in pay):
            raise ValueError("payload scalars must be nonzero")
        table = {(n, r, c): float(pay[n + 1][c] / pay[n][r])
                 for (n, r, c), _ in _incidences(base)}
        return cls(base, table, payload=pay)

    @classmethod
    def from_table(cls, base: FilteredComplex, table, payload=None) -> "CellularSheaf":
        """``table``: mapping or pair-iterable of (dim, face, coface) -> scalar."""
        return cls(base, {(int(n), int(r), int(c)): float(v)
                          for (n, r, c), v in dict(table).items()},
                   payload=tuple(payload) if payload is not None else None)

    @classmethod
    def from_callback(cls, base: FilteredComplex, fn, payload=None,
                      serial: bool = False) -> "CellularSheaf":
        """Arbitrary restriction logic: ``fn(base, dim, face, coface, payload)``.

        The callback runs once per incidence, in one thread when
        ``serial=True`` (and, as implemented, in one thread regardless).
        """
        pay = tuple(payload) if payload is not None else None
        table = {(n, r, c): float(fn(base, n, r, c, pay))
                 for (n, r, c), _ in _incidences(base)}
        return cls(base, table, payload=pay, serial_restriction=serial)


def sheaf_coboundary(sheaf: CellularSheaf, n: int) -> sp.csc_array:
    """Weighted coboundary: rows are (n+1)-cells, columns n-cells.

    Entry (coface, face) is the base's incidence sign times the restriction
    scalar; dimensions above the top give a 0 x count matrix.
    """
    base = sheaf.base
    base._check_dim(n)
    cols = base.filtrations[n].size
    if n == base.max_dim:
        return sp.csc_array((0, cols), dtype=np.float64)
    coo = base.boundaries[n].tocoo()
    vals = np.array(
        [np.sign(v) * sheaf.restrictions[(n, int(r), int(c))]
         for r, c, v in zip(coo.row, coo.col, coo.data)],
        dtype=np.float64)
    return sp.csc_array((vals, (coo.col, coo.row)),
                        shape=(base.filtrations[n + 1].size, cols))


def check_composition(sheaf: CellularSheaf, rtol: float = 1e-9) -> ValidationReport:
    """Compare restriction products along all codim-1 paths of codim-2 pairs.

    For each face rho <= coface tau two dimensions up, the product of the
    two restriction scalars must not depend on the intermediate cell; every
    deviating path is reported with its (rho, sigma, tau) triple.
    """
    base = sheaf.base
    bad: list[Violation] = []
    for n in range(base.max_dim - 1):
        B_mid = base.boundaries[n]      # faces rho of sigma
        B_top = base.boundaries[n + 1]  # faces sigma of tau
        for t in range(B_top.shape[1]):
            col = B_top[:, [t]].tocoo()
            paths: dict[int, list[tuple[int, float]]] = {}
            for s in col.row:
                upper = sheaf.restrictions[(n + 1, int(s), t)]
                face_col = B_mid[:, [int(s)]].tocoo()
                for r in face_col.row:
                    prod = upper * sheaf.restrictions[(n, int(r), int(s))]
                    paths.setdefault(int(r), []).append((int(s), prod))
            for r, route in paths.items():
                s0, p0 = route[0]
                for s, p in route[1:]:
                    if not np.isclose(p, p0, rtol=rtol, atol=1e-12):
                        bad.append(Violation(
                            "composition",
                            f"dim-{n} cell {r} <= dim-{n + 2} cell {t}",
                            f"product via cell {s0} is {p0:g} but via cell {s} is {p:g}"))
    return ValidationReport(tuple(bad))


def weighted_complex(sheaf: CellularSheaf) -> FilteredComplex:
    """Real-valued filtered complex whose boundaries are the transposed
    weighted coboundaries; feeds the ordinary Laplacian pipeline."""
    boundaries = [sheaf_coboundary(sheaf, n).T for n in range(sheaf.base.max_dim)]
    return FilteredComplex(boundaries, sheaf.base.filtrations)


def persistent_sheaf_laplacian(sheaf: CellularSheaf, n: int, a: float,
                               b: float | None = None, force: bool = False,
                               up_fn=None, dtype=np.float64) -> np.ndarray:
    """Persistent Laplacian of the weighted complex across (a, b).

    Composition consistency is checked first; ``force=True`` downgrades an
    inconsistent sheaf to a warning (the matrix arithmetic still goes
    through, the homological reading does not).
    """
    report = check_composition(sheaf)
    if not report.ok:
        if not force:
            raise ValueError(f"restriction scalars are not composition-consistent:\n{report}")
        warnings.warn(
            f"computing on a composition-inconsistent sheaf "
            f"({len(report.violations)} mismatched paths)", stacklevel=2)
    return persistent_laplacian(weighted_complex(sheaf), n, a, b,
                                up_fn=up_fn, dtype=dtype)


# -- serialization --------------------------------------------------------


def is_sheaf_doc(doc: dict) -> bool:
    return "restrictions" in doc or "rule" in doc


def sheaf_from_dict(doc: dict) -> CellularSheaf:
    """Complex-core document plus restriction data.

    Either an explicit ``"restrictions": [[dim, face, coface, scalar], ...]``
    table or a ``"rule"`` name (``constant``, or ``payload`` with a
    ``"payload"`` array per dimension).
    """
    base = FilteredComplex.from_dict(doc)
    payload = doc.get("payload")
    if "restrictions" in doc:
        table = {}
        for entry in doc["restrictions"]:
            if len(entry) != 4:
                raise ValueError(f"restriction entry must be [dim, face, coface, scalar], got {entry}")
            n, r, c, v = entry
            table[(int(n), int(r), int(c))] = float(v)
        return CellularSheaf.from_table(base, table, payload=payload)
    rule = doc.get("rule", "constant")
    if rule == "constant":
        return CellularSheaf.constant(base)
    if rule == "payload":
        if payload is None:
            raise ValueError('rule "payload" requires a "payload" array per dimension')
        return CellularSheaf.from_payload(base, payload)
    raise ValueError(f'unknown restriction rule {rule!r}; file rules are "constant" and "payload"')


def sheaf_to_dict(sheaf: CellularSheaf) -> dict:
    doc = sheaf.base.to_dict()
    doc["restrictions"] = [[n, r, c, float(v)]
                           for (n, r, c), v in sorted(sheaf.restrictions.items())]
    if sheaf.payload is not None:
        doc["payload"] = [[float(x) for x in p] for p in sheaf.payload]
    return doc


def load_sheaf_json(path: str) -> CellularSheaf:
    with open(path) as fh:
        return sheaf_from_dict(json.load(fh))
