"""Weighted-aggregation coarsening driven by algebraic couplings.

One coarsening step selects seed nodes by future volume and coupling
strength, attaches every other node to at most ``caliber`` neighboring
seeds, and forms the coarse graph by the Galerkin triple product
``P^T W P``. Three coupling modes are supported:

``relaxation``
    algebraic couplings from relaxed test vectors, mixed with the raw
    weights in the seed test and in the final neighbor choice.
``algebraic-only``
    algebraic couplings replace the weights everywhere.
``classical``
    the classical relative-weight coupling; no test vectors are relaxed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from numba import njit

from .algdist import CouplingTable, RelaxParams, build_coupling_table, relax_test_vectors
from .graph import WeightedGraph

log = logging.getLogger(__name__)

COUPLING_MODES = ("relaxation", "classical", "algebraic-only")
DROP_TOL = 1e-12


@dataclass(frozen=True)
class CoarsenParams:
    Q: float = 0.5
    nu: float = 2.0
    beta: float = 0.5
    caliber: int = 1
    coupling_mode: str = "relaxation"
    relax: RelaxParams = field(default_factory=RelaxParams)
    distance_kind: str = "max-norm"
    max_levels: int = 100
    coarsest_size: int = 8
    stall_ratio: float = 0.98

    def __post_init__(self):
        if not 0 < self.Q < 1:
            raise ValueError("Q must lie in (0, 1)")
        if self.nu < 1:
            raise ValueError("nu must be at least 1")
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0, 1]")
        if self.caliber < 1:
            raise ValueError("caliber must be at least 1")
        if self.coupling_mode not in COUPLING_MODES:
            raise ValueError(f"coupling_mode must be one of {COUPLING_MODES}")

    def with_seed(self, seed) -> "CoarsenParams":
        return replace(self, relax=replace(self.relax, seed=seed))


@dataclass(frozen=True, eq=False)
class InterpolationMap:
    P: sp.csr_matrix
    seeds: np.ndarray
    coarse_index: np.ndarray  # fine id -> coarse ordinal, -1 for F nodes
    neighborhoods: dict[int, list[int]]
    rescued: list[int] = field(default_factory=list)

    @property
    def aggregate(self) -> np.ndarray:
        """Coarse node holding the largest fraction of each fine node."""
        P = self.P
        out = np.empty(P.shape[0], dtype=np.int64)
        for i in range(P.shape[0]):
            lo, hi = P.indptr[i], P.indptr[i + 1]
            cols, vals = P.indices[lo:hi], P.data[lo:hi]
            best = np.lexsort((cols, -vals))[0]
            out[i] = cols[best]
        return out


@dataclass(eq=False)
class Level:
    graph: WeightedGraph
    table: CouplingTable | None = None
    seeds: np.ndarray | None = None
    interp: InterpolationMap | None = None


@dataclass(eq=False)
class Hierarchy:
    levels: list[Level]
    stop_reason: str = ""
    events: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.levels)

    def sizes(self) -> list[int]:
        return [lv.graph.n for lv in self.levels]

    @property
    def finest(self) -> WeightedGraph:
        return self.levels[0].graph

    @property
    def coarsest(self) -> WeightedGraph:
        return self.levels[-1].graph

    def membership(self, level: int) -> np.ndarray:
        """Dominant level-``level`` aggregate of every finest-level node."""
        agg = np.arange(self.levels[0].graph.n)
        for lv in self.levels[:level]:
            agg = lv.interp.aggregate[agg]
        return agg


def _coupling_field(ct: CouplingTable, mode: str) -> np.ndarray:
    if mode == "classical":
        return ct.classical
    return ct.coupling


def future_volumes(g: WeightedGraph, ct: CouplingTable, mode: str = "relaxation") -> np.ndarray:
    """Future volume of every node.

    Each neighbor ``j`` contributes its volume times the share of its
    total coupling that points at ``i``. Classical mode uses raw weights.
    """
    c = g.weights if mode == "classical" else _coupling_field(ct, mode)
    rows = g.edge_rows()
    cols = g.indices
    total = np.bincount(rows, weights=c, minlength=g.n)
    share = g.volumes[cols] * c / total[cols]
    return g.volumes + np.bincount(rows, weights=share, minlength=g.n)


def future_volume(g: WeightedGraph, ct: CouplingTable, i: int, mode: str = "relaxation") -> float:
    return float(future_volumes(g, ct, mode)[i])


@njit(cache=True)
def _select_seeds(indptr, indices, w, c, order, in_c, Q, use_w, use_c):
    for i in order:
        if in_c[i]:
            continue
        sum_c = 0.0
        sum_c_in = 0.0
        sum_w = 0.0
        sum_w_in = 0.0
        for e in range(indptr[i], indptr[i + 1]):
            j = indices[e]
            sum_c += c[e]
            sum_w += w[e]
            if in_c[j]:
                sum_c_in += c[e]
                sum_w_in += w[e]
        ratio_c = sum_c_in / sum_c if sum_c > 0 else 0.0
        ratio_w = sum_w_in / sum_w if sum_w > 0 else 0.0
        if (use_c and ratio_c <= Q) or (use_w and ratio_w <= Q):
            in_c[i] = True
    return in_c


def select_coarse_nodes(g: WeightedGraph, ct: CouplingTable, params: CoarsenParams) -> np.ndarray:
    """Seed set as a sorted array of node ids.

    Future volumes and their mean are computed once. Nodes scanned in
    descending future volume (ties by id) join the seeds when their share
    of coupling, or of weight, into the current seed set is at most ``Q``.
    """
    mode = params.coupling_mode
    fv = future_volumes(g, ct, mode)
    in_c = fv > params.nu * fv.mean()
    order = np.lexsort((np.arange(g.n), -fv)).astype(np.int64)
    c = _coupling_field(ct, mode)
    in_c = _select_seeds(
        g.indptr, g.indices, g.weights, c, order, in_c.copy(), params.Q,
        mode != "algebraic-only", True,
    )
    return np.nonzero(in_c)[0]


def coarse_neighborhood(
    candidates, w, c, caliber: int, beta: float, by_coupling: bool = False
) -> list[int]:
    """Seeds that a non-seed node interpolates from.

    ``candidates`` are the node's seed neighbors with edge weights ``w``
    and couplings ``c``. Seeds whose coupling is below ``beta`` times the
    strongest are dropped; if more than ``caliber`` remain, the ones with
    the largest weight (largest coupling when ``by_coupling``) are kept,
    ties going to larger coupling and then lower id.
    """
    candidates = np.asarray(candidates)
    if candidates.size == 0:
        return []
    w = np.asarray(w, dtype=float)
    c = np.asarray(c, dtype=float)
    keep = c >= beta * c.max()
    cand, w, c = candidates[keep], w[keep], c[keep]
    if cand.size <= caliber:
        return sorted(int(x) for x in cand)
    primary = c if by_coupling else w
    order = np.lexsort((cand, -c, -primary))
    return sorted(int(x) for x in cand[order[:caliber]])


def build_interpolation(
    g: WeightedGraph, ct: CouplingTable, seeds, params: CoarsenParams
) -> InterpolationMap:
    mode = params.coupling_mode
    c = _coupling_field(ct, mode)
    in_c = np.zeros(g.n, dtype=bool)
    in_c[np.asarray(seeds, dtype=np.int64)] = True

    rescued = []
    for i in range(g.n):
        if in_c[i]:
            continue
        nbrs, _ = g.neighbors(i)
        if not in_c[nbrs].any():
            in_c[i] = True
            rescued.append(i)
    for i in rescued:
        log.info("rescue: node %d has no seed neighbor, promoted to seed", i)

    seed_ids = np.nonzero(in_c)[0]
    coarse_index = np.full(g.n, -1, dtype=np.int64)
    coarse_index[seed_ids] = np.arange(seed_ids.size)

    rows, cols, vals = [], [], []
    neighborhoods: dict[int, list[int]] = {}
    by_coupling = mode == "algebraic-only"
    for i in range(g.n):
        if in_c[i]:
            rows.append(i)
            cols.append(coarse_index[i])
            vals.append(1.0)
            continue
        lo, hi = g.indptr[i], g.indptr[i + 1]
        nbrs = g.indices[lo:hi]
        mask = in_c[nbrs]
        chosen = coarse_neighborhood(
            nbrs[mask], g.weights[lo:hi][mask], c[lo:hi][mask],
            params.caliber, params.beta, by_coupling,
        )
        neighborhoods[i] = chosen
        lookup = dict(zip(nbrs.tolist(), range(lo, hi)))
        weights = np.array([(c if by_coupling else g.weights)[lookup[j]] for j in chosen])
        weights = weights / weights.sum()
        for j, x in zip(chosen, weights):
            rows.append(i)
            cols.append(coarse_index[j])
            vals.append(x)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(g.n, seed_ids.size))
    P.sort_indices()
    return InterpolationMap(P, seed_ids, coarse_index, neighborhoods, rescued)


def build_coarse_graph(g: WeightedGraph, P: sp.spmatrix) -> WeightedGraph:
    """Galerkin coarse graph ``P^T W P`` without self-loops; volumes ``P^T v``."""
    P = sp.csr_matrix(P)
    coarse = (P.T @ g.adjacency @ P).tocsr()
    coarse.setdiag(0.0)
    coarse.data[np.abs(coarse.data) < DROP_TOL] = 0.0
    coarse.eliminate_zeros()
    coarse.sort_indices()
    # symmetrise exactly against rounding in the triple product
    coarse = ((coarse + coarse.T) * 0.5).tocsr()
    coarse.sort_indices()
    volumes = P.T @ g.volumes
    return WeightedGraph(coarse, np.asarray(volumes, dtype=float))


def coupling_table_for(g: WeightedGraph, params: CoarsenParams, level: int = 0) -> CouplingTable:
    if params.coupling_mode == "classical":
        return build_coupling_table(g, None, params.distance_kind)
    seed = params.relax.seed
    seed = tuple(seed) if isinstance(seed, (tuple, list)) else (seed,)
    relax = replace(params.relax, seed=seed + (level,))
    tv = relax_test_vectors(g, relax)
    return build_coupling_table(g, tv, params.distance_kind)


def coarsen_once(g: WeightedGraph, params: CoarsenParams, level: int = 0):
    ct = coupling_table_for(g, params, level)
    seeds = select_coarse_nodes(g, ct, params)
    interp = build_interpolation(g, ct, seeds, params)
    return ct, interp


def build_hierarchy(g: WeightedGraph, params: CoarsenParams | None = None) -> Hierarchy:
    params = params or CoarsenParams()
    if g.n == 0:
        raise ValueError("graph is empty")
    levels = [Level(g)]
    events: list[str] = []
    reason = ""
    while True:
        cur = levels[-1]
        k = len(levels) - 1
        if cur.graph.n <= params.coarsest_size:
            reason = f"coarsest size reached (n={cur.graph.n})"
            break
        if k >= params.max_levels:
            reason = f"level cap reached ({params.max_levels})"
            break
        ct, interp = coarsen_once(cur.graph, params, k)
        for node in interp.rescued:
            events.append(f"level {k}: rescued node {node}")
        ratio = interp.seeds.size / cur.graph.n
        if ratio > params.stall_ratio:
            reason = f"stalled at level {k} (|C|/|V|={ratio:.3f})"
            cur.table = ct
            break
        cur.table, cur.seeds, cur.interp = ct, interp.seeds, interp
        levels.append(Level(build_coarse_graph(cur.graph, interp.P)))
    log.info("hierarchy sizes %s; stop: %s", [lv.graph.n for lv in levels], reason)
    return Hierarchy(levels, reason, events)
