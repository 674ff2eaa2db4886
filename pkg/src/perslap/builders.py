"""Constructors that turn geometric or relational data into filtered complexes.

All builders emit cells sorted by (filtration value, vertex tuple) within each
dimension and boundary matrices with the alternating-sign convention: the face
obtained by deleting position i of a cell's vertex tuple gets sign (-1)^i.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .complexes import FilteredComplex
from .validation import check_distance_matrix

__all__ = [
    "rips",
    "FilteredDigraph",
    "directed_flag",
    "dowker_sink",
    "dowker_source",
    "dowker_pair",
    "load_point_cloud",
    "load_distance_matrix",
    "load_digraph",
    "load_weights",
    "load_relation",
]

Cell = tuple[int, ...]


def _assemble(levels: list[dict[Cell, float]]) -> FilteredComplex:
    """Cells per dimension (tuple -> filtration) to a sorted FilteredComplex."""
    ordered = [sorted(lv, key=lambda c: (lv[c], c)) for lv in levels]
    filts = [np.array([levels[n][c] for c in cells], dtype=np.float64)
             for n, cells in enumerate(ordered)]
    boundaries = []
    for n in range(1, len(ordered)):
        index = {c: i for i, c in enumerate(ordered[n - 1])}
        rows, cols, vals = [], [], []
        for j, cell in enumerate(ordered[n]):
            for i in range(len(cell)):
                rows.append(index[cell[:i] + cell[i + 1:]])
                cols.append(j)
                vals.append(1 if i % 2 == 0 else -1)
        boundaries.append(sp.csc_array(
            (np.array(vals, dtype=np.int64),
             (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
            shape=(len(ordered[n - 1]), len(ordered[n]))))
    return FilteredComplex(boundaries, filts)


def _check_scope(max_dim: int, threshold: float) -> None:
    if max_dim < 0:
        raise ValueError(f"max_dim must be >= 0, got {max_dim}")
    if np.isnan(threshold):
        raise ValueError("threshold must not be NaN")


def rips(dist, max_dim: int, threshold: float = np.inf) -> FilteredComplex:
    """Vietoris-Rips complex of a distance matrix.

    A subset enters at its diameter (vertices at 0); subsets with diameter
    above ``threshold`` are dropped.  Enumeration walks cliques of the
    threshold graph, extending only past the largest vertex so each subset is
    visited once.
    """
    D = check_distance_matrix(dist)
    _check_scope(max_dim, threshold)
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    k = D.shape[0]
    nbrs = {v: {w for w in range(k) if w != v and D[v, w] <= threshold} for v in range(k)}
    levels: list[dict[Cell, float]] = [{(v,): 0.0 for v in range(k)}]
    for n in range(1, max_dim + 1):
        nxt: dict[Cell, float] = {}
        for cell, f in levels[n - 1].items():
            cand = set.intersection(*(nbrs[v] for v in cell))
            for w in cand:
                if w > cell[-1]:
                    nxt[cell + (w,)] = max(f, max(D[v, w] for v in cell))
        levels.append(nxt)
    return _assemble(levels)


@dataclass(frozen=True)
class FilteredDigraph:
    """Vertex filtration values plus directed edges (u, v) -> filtration.

    Edges must join distinct vertices and enter no earlier than their
    endpoints; both (u, v) and (v, u) may be present.
    """

    vertex_filtrations: np.ndarray
    edges: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        vf = np.asarray(self.vertex_filtrations, dtype=np.float64).reshape(-1)
        vf.setflags(write=False)
        object.__setattr__(self, "vertex_filtrations", vf)
        n = vf.size
        for (u, v), f in self.edges.items():
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) references a missing vertex")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if f < max(vf[u], vf[v]):
                raise ValueError(
                    f"edge ({u}, {v}) enters at {f:g}, before an endpoint")

    @property
    def n_vertices(self) -> int:
        return self.vertex_filtrations.size


def directed_flag(g: FilteredDigraph, max_dim: int) -> FilteredComplex:
    """Directed flag complex: ordered vertex tuples with every i<j edge present.

    The tuple order matters ((u, v) and (v, u) are distinct cells when both
    edges exist); a cell enters at the max filtration value of its vertices
    and edges.
    """
    _check_scope(max_dim, np.inf)
    out: dict[int, set[int]] = {v: set() for v in range(g.n_vertices)}
    for u, v in g.edges:
        out[u].add(v)
    levels: list[dict[Cell, float]] = [
        {(v,): float(g.vertex_filtrations[v]) for v in range(g.n_vertices)}]
    if max_dim >= 1:
        levels.append({(u, v): f for (u, v), f in g.edges.items()})
    for n in range(2, max_dim + 1):
        nxt: dict[Cell, float] = {}
        for cell, f in levels[n - 1].items():
            cand = set.intersection(*(out[v] for v in cell))
            for w in cand:
                nxt[cell + (w,)] = max(f, max(g.edges[(v, w)] for v in cell))
        levels.append(nxt)
    return _assemble(levels)


def _dowker(W: np.ndarray, max_dim: int, threshold: float) -> FilteredComplex:
    # subset filtration: best witness column, worst row within the subset
    k = W.shape[0]
    levels: list[dict[Cell, float]] = []
    for n in range(max_dim + 1):
        lv: dict[Cell, float] = {}
        for cell in combinations(range(k), n + 1):
            f = np.min(np.max(W[list(cell), :], axis=0)) if W.shape[1] else np.inf
            if np.isfinite(f) and f <= threshold:
                lv[cell] = float(f)
        levels.append(lv)
    return _assemble(levels)


def dowker_sink(weights, max_dim: int, threshold: float = np.inf) -> FilteredComplex:
    """Dowker complex on the rows of a weight matrix.

    ``weights[x, y]`` may be ``inf`` for absent pairs.  A row subset enters at
    ``min_y max_x weights[x, y]``; subsets with no finite witness are omitted.
    """
    W = np.asarray(weights, dtype=np.float64)
    _check_scope(max_dim, threshold)
    if W.ndim != 2:
        raise ValueError(f"weight matrix must be 2-D, got shape {W.shape}")
    if np.any(np.isnan(W)):
        raise ValueError("weight matrix contains NaN")
    return _dowker(W, max_dim, threshold)


def dowker_source(weights, max_dim: int, threshold: float = np.inf) -> FilteredComplex:
    """Dowker complex on the columns of a weight matrix (transposed roles)."""
    W = np.asarray(weights, dtype=np.float64)
    return dowker_sink(W.T, max_dim, threshold)


def dowker_pair(relation, max_dim: int) -> tuple[FilteredComplex, FilteredComplex]:
    """Unfiltered Dowker pair of a 0/1 relation matrix.

    Returns the complex on the rows and the complex on the columns: a subset
    is included when some column (resp. row) relates to all of its members.
    All cells carry filtration value 0.
    """
    R = np.asarray(relation)
    if R.ndim != 2:
        raise ValueError(f"relation must be a 2-D matrix, got shape {R.shape}")
    if not np.isin(R, (0, 1)).all():
        raise ValueError("relation entries must be 0 or 1")
    W = np.where(R.astype(bool), 0.0, np.inf)
    return _dowker(W, max_dim, 0.0), _dowker(W.T, max_dim, 0.0)


# -- file loaders ---------------------------------------------------------


def _read_rows(path: str) -> list[tuple[int, list[str]]]:
    """(line number, fields) per data line; comments after ``#``, commas or
    whitespace as separators."""
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if line:
                rows.append((lineno, line.replace(",", " ").split()))
    return rows


def _parse(path: str, lineno: int, token: str, kind) -> float | int:
    try:
        return kind(token)
    except ValueError:
        raise ValueError(
            f"{path}:{lineno}: cannot parse {token!r} as {kind.__name__}") from None


def load_point_cloud(path: str) -> np.ndarray:
    """CSV/whitespace table, one point per row."""
    rows = _read_rows(path)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0][1])
    data = []
    for lineno, r in rows:
        if len(r) != width:
            raise ValueError(f"{path}:{lineno}: expected {width} fields, got {len(r)}")
        data.append([_parse(path, lineno, x, float) for x in r])
    return np.array(data, dtype=np.float64)


def load_distance_matrix(path: str) -> np.ndarray:
    return check_distance_matrix(load_point_cloud(path))


def load_digraph(path: str) -> FilteredDigraph:
    """Edge-list file: ``v f`` lines set vertex filtrations, ``u v f`` lines
    add edges; ``#`` starts a comment.  Unlisted vertices default to 0.
    """
    vf: dict[int, float] = {}
    edges: dict[tuple[int, int], float] = {}
    top = -1
    for lineno, r in _read_rows(path):
        if len(r) == 2:
            v = _parse(path, lineno, r[0], int)
            vf[v] = _parse(path, lineno, r[1], float)
            top = max(top, v)
        elif len(r) == 3:
            u, v = (_parse(path, lineno, t, int) for t in r[:2])
            if (u, v) in edges:
                raise ValueError(f"{path}:{lineno}: duplicate edge ({u}, {v})")
            edges[(u, v)] = _parse(path, lineno, r[2], float)
            top = max(top, u, v)
        else:
            raise ValueError(f"{path}:{lineno}: expected 2 or 3 fields, got {len(r)}")
    filts = np.array([vf.get(v, 0.0) for v in range(top + 1)])
    return FilteredDigraph(filts, edges)


def load_weights(path: str) -> np.ndarray:
    """Weighted pair list ``x y w`` (self-pairs allowed); absent pairs are inf."""
    entries = {}
    nx = ny = 0
    for lineno, r in _read_rows(path):
        if len(r) != 3:
            raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(r)}")
        x, y = (_parse(path, lineno, t, int) for t in r[:2])
        entries[(x, y)] = _parse(path, lineno, r[2], float)
        nx, ny = max(nx, x + 1), max(ny, y + 1)
    if not entries:
        raise ValueError(f"{path}: no data rows")
    W = np.full((nx, ny), np.inf)
    for (x, y), w in entries.items():
        W[x, y] = w
    return W


def load_relation(path: str) -> np.ndarray:
    R = load_point_cloud(path)
    if not np.isin(R, (0, 1)).all():
        raise ValueError(f"{path}: relation entries must be 0 or 1")
    return R.astype(np.int64)
