"""Balanced 2-partitioning: exhaustive coarsest solve, projection, FM refinement."""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.sparse.csgraph import breadth_first_order

from ..coarsen import CoarsenParams, build_hierarchy
from ..graph import WeightedGraph

log = logging.getLogger(__name__)

MAX_EXHAUSTIVE = 20


@dataclass(frozen=True, eq=False)
class Bipartition:
    side: np.ndarray  # labels in {1, 2}
    alpha: float = 0.0

    def __post_init__(self):
        labels = set(np.unique(self.side).tolist())
        if labels != {1, 2}:
            raise ValueError("both sides of a bipartition must be nonempty")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")

    def is_balanced(self, sizes: np.ndarray | None = None) -> bool:
        sizes = np.ones(len(self.side)) if sizes is None else sizes
        return side_loads(self.side, sizes).max() <= balance_bound(sizes, self.alpha) + 1e-9


def side_loads(side: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    return np.array([sizes[side == 1].sum(), sizes[side == 2].sum()])


def balance_bound(sizes: np.ndarray, alpha: float) -> float:
    return (1.0 + alpha) * float(np.sum(sizes)) / 2.0


def cut_cost(g: WeightedGraph, b: Bipartition | np.ndarray) -> float:
    side = b.side if isinstance(b, Bipartition) else np.asarray(b)
    i, j, w = g.edges()
    return float(w[side[i] != side[j]].sum())


def exhaustive_bisection(g: WeightedGraph, sizes: np.ndarray, alpha: float) -> np.ndarray:
    """Minimum cut over all splits with both sides nonempty (``n <= 20``).

    Splits satisfying the balance bound are preferred; if none exists the
    bound is relaxed to the most balanced achievable split. Node 0 is kept
    on side 1 to halve the search.
    """
    n = g.n
    if n > MAX_EXHAUSTIVE:
        raise ValueError(f"exhaustive bisection limited to n <= {MAX_EXHAUSTIVE}")
    if n < 2:
        raise ValueError("bisection needs at least two nodes")
    masks = np.arange(1, 2 ** (n - 1), dtype=np.int64) << 1  # bit 0 clear: node 0 on side 1
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    load2 = bits @ sizes
    total = float(np.sum(sizes))
    heavy = np.maximum(load2, total - load2)
    bound = max(balance_bound(sizes, alpha), heavy.min())
    feasible = heavy <= bound + 1e-9
    i, j, w = g.edges()
    cut = (bits[:, i] != bits[:, j]) @ w if i.size else np.zeros(len(masks))
    cut = np.where(feasible, cut, np.inf)
    # ties: lower cut, then lighter heavy side, then lowest mask
    best = np.lexsort((masks, heavy, cut))[0]
    return np.where(bits[best], 2, 1)


def _gains(g: WeightedGraph, side: np.ndarray) -> np.ndarray:
    rows = g.edge_rows()
    external = np.where(side[rows] != side[g.indices], g.weights, -g.weights)
    return np.bincount(rows, weights=external, minlength=g.n)


def fm_pass(
    g: WeightedGraph, side: np.ndarray, sizes: np.ndarray, bound: float, stall_limit: int | None = None
) -> tuple[np.ndarray, float]:
    """One Fiduccia-Mattheyses pass; returns the best prefix and its cut gain.

    Each node moves at most once. Candidates are boundary nodes kept in a
    max-gain heap per side; only moves keeping both loads within ``bound``
    are made. The pass rolls back to the best prefix (largest total gain,
    then smallest heavy load).
    """
    side = side.copy()
    n = g.n
    gain = _gains(g, side)
    loads = side_loads(side, sizes).astype(float)
    counts = [int((side == 1).sum()), int((side == 2).sum())]
    locked = np.zeros(n, dtype=bool)
    version = np.zeros(n, dtype=np.int64)
    heaps: dict[int, list] = {1: [], 2: []}
    rows = g.edge_rows()
    boundary = np.zeros(n, dtype=bool)
    boundary[rows[side[rows] != side[g.indices]]] = True
    for u in np.nonzero(boundary)[0]:
        heapq.heappush(heaps[side[u]], (-gain[u], u, 0))

    stall_limit = stall_limit or max(25, n // 20)
    moves: list[int] = []
    total = best_total = 0.0
    best_len = 0
    best_heavy = loads.max()
    since_best = 0
    while since_best < stall_limit:
        candidate = None
        for s in (1, 2):
            h = heaps[s]
            while h:
                neg, u, ver = h[0]
                if locked[u] or ver != version[u] or side[u] != s:
                    heapq.heappop(h)
                    continue
                if loads[2 - s] + sizes[u] > bound + 1e-9 or counts[s - 1] == 1:
                    break
                if candidate is None or (-neg, -u) > (gain[candidate], -candidate):
                    candidate = u
                break
        if candidate is None:
            break
        u = candidate
        s, t = side[u], 3 - side[u]
        heapq.heappop(heaps[s])
        locked[u] = True
        side[u] = t
        loads[s - 1] -= sizes[u]
        loads[t - 1] += sizes[u]
        counts[s - 1] -= 1
        counts[t - 1] += 1
        total += gain[u]
        gain[u] = -gain[u]
        moves.append(u)
        lo, hi = g.indptr[u], g.indptr[u + 1]
        for v, w in zip(g.indices[lo:hi], g.weights[lo:hi]):
            if locked[v]:
                continue
            gain[v] += 2 * w if side[v] == s else -2 * w
            version[v] += 1
            heapq.heappush(heaps[side[v]], (-gain[v], v, version[v]))
        heavy = loads.max()
        if total > best_total + 1e-12 or (abs(total - best_total) <= 1e-12 and heavy < best_heavy - 1e-12):
            best_total, best_len, best_heavy = total, len(moves), heavy
            since_best = 0
        else:
            since_best += 1
    for u in moves[best_len:]:
        side[u] = 3 - side[u]
    return side, best_total


def fm_refine(g: WeightedGraph, side: np.ndarray, sizes: np.ndarray, bound: float) -> np.ndarray:
    """Repeat FM passes until a pass fails to improve the cut."""
    while True:
        side, improvement = fm_pass(g, side, sizes, bound)
        if improvement <= 1e-12:
            return side


def rebalance(g: WeightedGraph, side: np.ndarray, sizes: np.ndarray, bound: float) -> np.ndarray:
    """Move nodes off the heavy side, cheapest cut increase first, until within bound.

    Stops early when no single move lowers the heavy load (the bound is
    unattainable, e.g. an odd node count with ``alpha`` near 0).
    """
    side = side.copy()
    loads = side_loads(side, sizes)
    while loads.max() > bound + 1e-9:
        heavy = 1 if loads[0] > loads[1] else 2
        gain = _gains(g, side)
        members = np.nonzero(side == heavy)[0]
        if members.size <= 1:
            break
        fits = members[loads[2 - heavy] + sizes[members] <= bound + 1e-9]
        improves = members[loads[2 - heavy] + sizes[members] < loads[heavy - 1] - 1e-9]
        pool = fits if fits.size else improves
        if not pool.size:
            break
        u = pool[np.lexsort((pool, -gain[pool]))[0]]
        side[u] = 3 - heavy
        loads = side_loads(side, sizes)
    return side


def project_partition(P, coarse_side: np.ndarray) -> np.ndarray:
    """Each fine node takes the side holding most of its interpolation mass."""
    P = P.tocsr()
    mass2 = P @ (coarse_side == 2).astype(float)
    mass1 = P @ (coarse_side == 1).astype(float)
    return np.where(mass2 > mass1, 2, 1)


def _greedy_growth(g: WeightedGraph, sizes: np.ndarray) -> np.ndarray:
    """Breadth-first region growing from node 0 until half the load."""
    side = np.full(g.n, 2)
    order = list(breadth_first_order(g.adjacency, 0, directed=False, return_predecessors=False))
    reached = set(order)
    rest = [u for u in range(g.n) if u not in reached]
    half = sizes.sum() / 2.0
    acc = 0.0
    for u in order + rest:
        if acc + sizes[u] > half and acc > 0:
            break
        side[u] = 1
        acc += sizes[u]
    return side


class BisectionResult(NamedTuple):
    partition: Bipartition
    cut: float


def multilevel_bisection(
    g: WeightedGraph, alpha: float = 0.03, params: CoarsenParams | None = None
) -> tuple[Bipartition, float, float]:
    """Multilevel balanced bisection with the finest cut before and after FM.

    Balance is counted in nodes at the finest level and in aggregated
    volume on coarse levels. Coarse levels that cannot meet the bound keep
    the best balance they have; the finest level is repaired first.
    """
    if g.n < 2:
        raise ValueError("bisection needs at least two nodes")
    params = params or CoarsenParams()
    h = build_hierarchy(g, params)
    top = len(h) - 1

    def sizes_at(k):
        return np.ones(h.levels[k].graph.n) if k == 0 else h.levels[k].graph.volumes

    cg = h.levels[top].graph
    sizes = sizes_at(top)
    exact_top = cg.n <= MAX_EXHAUSTIVE
    if exact_top:
        side = exhaustive_bisection(cg, sizes, alpha)
    else:
        log.info("coarsest level has %d nodes; using greedy growth start", cg.n)
        side = _greedy_growth(cg, sizes)
    before = None
    for k in range(top, -1, -1):
        graph = h.levels[k].graph
        sizes = sizes_at(k)
        if k < top:
            side = project_partition(h.levels[k].interp.P, side)
        bound = balance_bound(sizes, alpha)
        if k == 0:
            side = rebalance(graph, side, sizes, bound)
        if len(np.unique(side)) < 2:
            side = _greedy_growth(graph, sizes)
        bound = max(bound, side_loads(side, sizes).max())
        if k == 0:
            before = cut_cost(graph, side)
        if k < top or not exact_top:
            side = fm_refine(graph, side, sizes, bound)
    part = Bipartition(side, alpha)
    return part, before, cut_cost(g, part)


def solve_bisection(
    g: WeightedGraph, alpha: float = 0.03, params: CoarsenParams | None = None
) -> BisectionResult:
    part, _, cut = multilevel_bisection(g, alpha, params)
    return BisectionResult(part, cut)
