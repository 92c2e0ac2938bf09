"""Weighted undirected graphs with node volumes.

Graphs are stored as a symmetric CSR adjacency (zero diagonal) plus a
per-node volume vector. Instances are treated as immutable; every
mutating helper returns a new graph.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph


class GraphError(ValueError):
    """Raised for invalid graph data or arguments."""


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    adjacency: sp.csr_matrix
    volumes: np.ndarray
    merged_duplicates: int = 0
    dropped_self_loops: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def indptr(self) -> np.ndarray:
        return self.adjacency.indptr

    @property
    def indices(self) -> np.ndarray:
        return self.adjacency.indices

    @property
    def weights(self) -> np.ndarray:
        return self.adjacency.data

    @property
    def num_edges(self) -> int:
        return self.adjacency.nnz // 2

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def weighted_degree(self) -> np.ndarray:
        if "wdeg" not in self._cache:
            self._cache["wdeg"] = np.asarray(self.adjacency.sum(axis=1)).ravel()
        return self._cache["wdeg"]

    def neighbors(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def weight(self, i: int, j: int) -> float:
        nbrs, w = self.neighbors(i)
        hit = np.nonzero(nbrs == j)[0]
        return float(w[hit[0]]) if hit.size else 0.0

    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Upper-triangle edge arrays ``(i, j, w)`` sorted by ``i`` then ``j``."""
        if "edges" not in self._cache:
            coo = sp.triu(self.adjacency, k=1).tocoo()
            order = np.lexsort((coo.col, coo.row))
            self._cache["edges"] = (
                coo.row[order].astype(np.int64),
                coo.col[order].astype(np.int64),
                coo.data[order].astype(np.float64),
            )
        return self._cache["edges"]

    def edge_rows(self) -> np.ndarray:
        """Row index of every stored CSR entry."""
        if "rows" not in self._cache:
            self._cache["rows"] = np.repeat(np.arange(self.n), self.degree())
        return self._cache["rows"]

    def components(self) -> tuple[int, np.ndarray]:
        if "components" not in self._cache:
            self._cache["components"] = csgraph.connected_components(
                self.adjacency, directed=False
            )
        return self._cache["components"]

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        i, j, w = self.edges()
        for arr in (np.array([self.n]), i, j, w, self.volumes):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()[:16]

    def laplacian(self) -> "LaplacianView":
        return LaplacianView(self)

    def subgraph(self, nodes: np.ndarray) -> "WeightedGraph":
        nodes = np.asarray(nodes)
        sub = self.adjacency[nodes][:, nodes].tocsr()
        return WeightedGraph(sub, self.volumes[nodes].copy())

    def scaled(self, gamma: float) -> "WeightedGraph":
        return WeightedGraph(self.adjacency * gamma, self.volumes.copy())


class LaplacianView:
    """Read-only Laplacian ``A = D - W`` of a :class:`WeightedGraph`."""

    def __init__(self, graph: WeightedGraph):
        self.graph = graph
        self.diagonal = graph.weighted_degree()

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d = self.diagonal if x.ndim == 1 else self.diagonal[:, None]
        return d * x - self.graph.adjacency @ x

    def row_apply(self, x: np.ndarray, i: int) -> float:
        nbrs, w = self.graph.neighbors(i)
        return float(np.sum(w * (x[i] - x[nbrs])))

    def toarray(self) -> np.ndarray:
        return np.diag(self.diagonal) - self.graph.adjacency.toarray()


def from_edges(
    n: int,
    edges: Iterable[tuple[int, int, float]],
    volumes: np.ndarray | None = None,
) -> WeightedGraph:
    """Build a graph from ``(i, j, w)`` triples.

    Both orientations of an edge may appear; duplicates are summed and
    counted in ``merged_duplicates``. Self-loops are dropped and counted.
    """
    edges = list(edges)
    if n < 0:
        raise GraphError("node count must be nonnegative")
    rows, cols, vals = [], [], []
    seen: set[tuple[int, int]] = set()
    merged = loops = 0
    for i, j, w in edges:
        i, j, w = int(i), int(j), float(w)
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError(f"edge ({i}, {j}) out of range for n={n}")
        if not np.isfinite(w) or w < 0:
            raise GraphError(f"invalid weight {w} on edge ({i}, {j})")
        if i == j:
            loops += 1
            continue
        if w == 0:
            continue
        key = (min(i, j), max(i, j))
        if key in seen:
            merged += 1
        seen.add(key)
        rows.append(key[0])
        cols.append(key[1])
        vals.append(w)
    return _assemble(n, rows, cols, vals, volumes, merged, loops)


def from_arrays(
    n: int,
    i: np.ndarray,
    j: np.ndarray,
    w: np.ndarray,
    volumes: np.ndarray | None = None,
) -> WeightedGraph:
    """Vectorised :func:`from_edges` for trusted input (one orientation per edge)."""
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    w = np.asarray(w, dtype=np.float64)
    keep = (i != j) & (w > 0)
    lo = np.minimum(i[keep], j[keep])
    hi = np.maximum(i[keep], j[keep])
    return _assemble(n, lo, hi, w[keep], volumes, 0, int((~keep).sum()))


def _assemble(n, rows, cols, vals, volumes, merged, loops) -> WeightedGraph:
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    upper = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    upper.sum_duplicates()
    adj = (upper + upper.T).tocsr()
    adj.sort_indices()
    adj.eliminate_zeros()
    if volumes is None:
        volumes = np.ones(n)
    volumes = np.asarray(volumes, dtype=np.float64).copy()
    if volumes.shape != (n,):
        raise GraphError("volume vector has wrong length")
    if n and np.any(volumes <= 0):
        raise GraphError("volumes must be positive")
    return WeightedGraph(adj, volumes, merged, loops)


def generate_mesh2d(rows: int, cols: int) -> WeightedGraph:
    """4-connected ``rows x cols`` grid with unit weights; node id ``r*cols + c``."""
    if rows < 2 or cols < 2:
        raise GraphError("mesh dimensions must be at least 2")
    ids = np.arange(rows * cols).reshape(rows, cols)
    horiz_i, horiz_j = ids[:, :-1].ravel(), ids[:, 1:].ravel()
    vert_i, vert_j = ids[:-1, :].ravel(), ids[1:, :].ravel()
    i = np.concatenate([horiz_i, vert_i])
    j = np.concatenate([horiz_j, vert_j])
    return from_arrays(rows * cols, i, j, np.ones(i.size))


def add_edge(g: WeightedGraph, i: int, j: int, w: float) -> WeightedGraph:
    """Return a copy of ``g`` with ``w`` added to edge ``ij``."""
    if i == j:
        raise GraphError("self-loops are not allowed")
    if not (0 <= i < g.n and 0 <= j < g.n):
        raise GraphError(f"node out of range: ({i}, {j})")
    if not w > 0:
        raise GraphError("added weight must be positive")
    extra = sp.coo_matrix(([w, w], ([i, j], [j, i])), shape=(g.n, g.n)).tocsr()
    adj = (g.adjacency + extra).tocsr()
    adj.sort_indices()
    return WeightedGraph(adj, g.volumes.copy())


def laplacian_row_apply(g: WeightedGraph, x: np.ndarray, i: int) -> float:
    """``(A x)_i = sum_k w_ik (x_i - x_k)``."""
    if len(x) != g.n:
        raise GraphError("vector length does not match node count")
    return LaplacianView(g).row_apply(np.asarray(x, dtype=float), i)


def path_graph(n: int, weight: float = 1.0) -> WeightedGraph:
    i = np.arange(n - 1)
    return from_arrays(n, i, i + 1, np.full(n - 1, weight))


def cycle_graph(n: int) -> WeightedGraph:
    i = np.arange(n)
    return from_arrays(n, i, (i + 1) % n, np.ones(n))


def star_graph(leaves: int) -> WeightedGraph:
    j = np.arange(1, leaves + 1)
    return from_arrays(leaves + 1, np.zeros(leaves, dtype=int), j, np.ones(leaves))


def random_graph(n: int, p: float, rng: np.random.Generator, weighted: bool = False) -> WeightedGraph:
    """Erdos-Renyi G(n, p); weights uniform in [0.5, 2] when ``weighted``."""
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    w = rng.uniform(0.5, 2.0, keep.sum()) if weighted else np.ones(keep.sum())
    return from_arrays(n, iu[keep], ju[keep], w)


def is_connected(g: WeightedGraph) -> bool:
    return g.n <= 1 or g.components()[0] == 1
