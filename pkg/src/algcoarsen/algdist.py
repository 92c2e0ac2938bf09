"""Relaxed test vectors and algebraic distances between graph nodes.

Test vectors are produced by damped Jacobi sweeps on the homogeneous
Laplacian system ``A x = 0`` from a random start. Nodes whose values stay
close across all vectors are algebraically close; the reciprocal of the
distance is the algebraic coupling used during coarsening.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import WeightedGraph

EPS_DISTANCE = 1e-12
RIDGE = 1e-10

DISTANCE_KINDS = ("max-norm", "sum-squares")
NORMALIZE_MODES = ("none", "zero-mean-unit-norm")


@dataclass(frozen=True)
class RelaxParams:
    K: int = 20
    r: int = 10
    omega: float = 0.5
    seed: int | tuple = 0
    normalize: str = "zero-mean-unit-norm"

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if self.r < 0:
            raise ValueError("r must be nonnegative")
        if not 0 < self.omega <= 1:
            raise ValueError("omega must lie in (0, 1]")
        if self.normalize not in NORMALIZE_MODES:
            raise ValueError(f"normalize must be one of {NORMALIZE_MODES}")


@dataclass(frozen=True, eq=False)
class TestVectorSet:
    """``values[:, k]`` is the k-th relaxed vector."""

    __test__ = False  # not a pytest class

    values: np.ndarray
    params: RelaxParams
    fingerprint: str = ""

    @property
    def K(self) -> int:
        return self.values.shape[1]

    @property
    def vectors(self) -> np.ndarray:
        return self.values.T

    def to_csv(self) -> str:
        n, K = self.values.shape
        lines = ["node,k,value"]
        for i in range(n):
            lines.extend(f"{i},{k},{self.values[i, k]:.6g}" for k in range(K))
        return "\n".join(lines) + "\n"


def _rng(seed) -> np.random.Generator:
    seq = seed if isinstance(seed, (tuple, list)) else (seed,)
    return np.random.default_rng(np.random.SeedSequence([int(s) for s in seq]))


def initial_vectors(n: int, p: RelaxParams) -> np.ndarray:
    return _rng(p.seed).uniform(-0.5, 0.5, size=(n, p.K))


def jacobi_sweeps(g: WeightedGraph, x: np.ndarray, r: int, omega: float) -> np.ndarray:
    """``r`` sweeps of ``x <- (1-omega) x + omega D^-1 (D - A) x``.

    ``D - A`` is the adjacency matrix for a Laplacian. Degree-0 rows keep
    their value.
    """
    deg = g.weighted_degree()
    active = deg > 0
    inv = np.zeros_like(deg)
    inv[active] = 1.0 / deg[active]
    inv = inv[:, None] if x.ndim == 2 else inv
    frozen = ~active
    x = np.array(x, dtype=float)
    for _ in range(r):
        jac = inv * (g.adjacency @ x)
        jac[frozen] = x[frozen]
        x = (1.0 - omega) * x + omega * jac
    return x


def normalize_per_component(g: WeightedGraph, x: np.ndarray) -> np.ndarray:
    """Zero mean and unit Euclidean norm per connected component and column."""
    ncomp, labels = g.components()
    x = np.array(x, dtype=float)
    sizes = np.bincount(labels, minlength=ncomp)
    means = np.zeros((ncomp, x.shape[1]))
    np.add.at(means, labels, x)
    means /= sizes[:, None]
    x -= means[labels]
    sq = np.zeros((ncomp, x.shape[1]))
    np.add.at(sq, labels, x * x)
    norms = np.sqrt(sq)
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    x *= scale[labels]
    x[sizes[labels] == 1] = 0.0
    return x


def relax_test_vectors(g: WeightedGraph, p: RelaxParams | None = None) -> TestVectorSet:
    p = p or RelaxParams()
    if g.n == 0:
        raise ValueError("graph is empty")
    x = jacobi_sweeps(g, initial_vectors(g.n, p), p.r, p.omega)
    if p.normalize == "zero-mean-unit-norm":
        x = normalize_per_component(g, x)
    return TestVectorSet(x, p, g.fingerprint())


def edge_algebraic_distance(tv: TestVectorSet, i: int, j: int, kind: str = "max-norm") -> float:
    diff = tv.values[i] - tv.values[j]
    if kind == "max-norm":
        return float(np.max(np.abs(diff)))
    if kind == "sum-squares":
        return float(np.sum(diff * diff))
    raise ValueError(f"unknown distance kind {kind!r}")


def classical_coupling(g: WeightedGraph, i: int, j: int) -> float:
    """``w_ij / max(sum_k w_ik, sum_k w_kj)``."""
    deg = g.weighted_degree()
    return g.weight(i, j) / max(deg[i], deg[j])


def classical_couplings(g: WeightedGraph) -> np.ndarray:
    """Classical coupling for every stored CSR entry."""
    deg = g.weighted_degree()
    rows = g.edge_rows()
    return g.weights / np.maximum(deg[rows], deg[g.indices])


@dataclass(frozen=True, eq=False)
class CouplingTable:
    """Per-edge distances and couplings aligned with the graph's CSR entries.

    ``distance``, ``coupling`` and ``classical`` have one value per stored
    adjacency entry, so row ``i`` of the table is the slice
    ``indptr[i]:indptr[i+1]``. Both orientations hold identical values.
    """

    graph: WeightedGraph
    distance: np.ndarray | None
    coupling: np.ndarray | None
    classical: np.ndarray
    kind: str = "max-norm"
    _records: dict = field(default_factory=dict, repr=False)

    def lookup(self, i: int, j: int) -> tuple[float, float, float]:
        lo, hi = self.graph.indptr[i], self.graph.indptr[i + 1]
        hit = np.nonzero(self.graph.indices[lo:hi] == j)[0]
        if not hit.size:
            raise KeyError((i, j))
        e = lo + hit[0]
        d = float(self.distance[e]) if self.distance is not None else math.nan
        c = float(self.coupling[e]) if self.coupling is not None else math.nan
        return d, c, float(self.classical[e])

    def records(self) -> list[tuple[int, int, float, float, float, float]]:
        i, j, w = self.graph.edges()
        out = []
        for a, b, x in zip(i, j, w):
            d, c, cl = self.lookup(int(a), int(b))
            out.append((int(a), int(b), float(x), d, c, cl))
        return out

    def to_csv(self) -> str:
        lines = ["i,j,w,d,c,classical"]
        for a, b, w, d, c, cl in self.records():
            lines.append(f"{a},{b},{w:.6g},{d:.6g},{c:.6g},{cl:.6g}")
        return "\n".join(lines) + "\n"


def edge_distances(g: WeightedGraph, tv: TestVectorSet, kind: str = "max-norm") -> np.ndarray:
    rows = g.edge_rows()
    diff = tv.values[rows] - tv.values[g.indices]
    if kind == "max-norm":
        return np.max(np.abs(diff), axis=1)
    if kind == "sum-squares":
        return np.sum(diff * diff, axis=1)
    raise ValueError(f"unknown distance kind {kind!r}")


def build_coupling_table(
    g: WeightedGraph, tv: TestVectorSet | None, kind: str = "max-norm"
) -> CouplingTable:
    """Distances and couplings for every edge; ``tv=None`` gives classical only."""
    classical = classical_couplings(g)
    if tv is None:
        return CouplingTable(g, None, None, classical, kind)
    d = edge_distances(g, tv, kind)
    c = 1.0 / np.maximum(d, EPS_DISTANCE)
    return CouplingTable(g, d, c, classical, kind)


def general_algebraic_distance(tv: TestVectorSet, i: int, j: int, p: float | str = 2) -> float:
    """``min_eta (sum_k |eta x_i - x_j / eta|^p)^(1/p)`` for ``p`` in {2, inf}."""
    return scaled_distance(tv.values[i], tv.values[j], p)


def scaled_distance(a: np.ndarray, b: np.ndarray, p: float | str = 2) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s_aa, s_bb, s_ab = float(a @ a), float(b @ b), float(a @ b)
    if s_aa == 0.0 or s_bb == 0.0:
        return math.sqrt(s_aa + s_bb)
    if p == 2:
        return math.sqrt(max(2.0 * math.sqrt(s_aa * s_bb) - 2.0 * s_ab, 0.0))
    if p in ("inf", math.inf):
        return _golden_max_norm(a, b)
    raise ValueError("p must be 2 or inf")


def _golden_max_norm(a: np.ndarray, b: np.ndarray, iterations: int = 200) -> float:
    def f(log_eta: float) -> float:
        eta = math.exp(log_eta)
        return float(np.max(np.abs(eta * a - b / eta)))

    lo, hi = math.log(1e-6), math.log(1e6)
    ratio = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - ratio * (hi - lo)
    x2 = lo + ratio * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(iterations):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - ratio * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + ratio * (hi - lo)
            f2 = f(x2)
    return min(f1, f2, f((lo + hi) / 2))


def algebraic_distance_to_set(
    tv: TestVectorSet, i: int, S
) -> tuple[float, dict[int, float]]:
    """Least-squares interpolation of node ``i`` from the nodes in ``S``.

    Returns the L2 deviation of the best fit over the K vectors and the
    fitted coefficient of each node in ``S``.
    """
    S = list(S)
    if not S:
        raise ValueError("S must be nonempty")
    if i in S:
        raise ValueError("i must not belong to S")
    if len(S) > tv.K:
        raise ValueError("underdetermined interpolation: |S| exceeds the number of test vectors")
    X = tv.values[S].T  # K x |S|
    y = tv.values[i]
    normal = X.T @ X + RIDGE * np.eye(len(S))
    coef = np.linalg.solve(normal, X.T @ y)
    resid = y - X @ coef
    return float(math.sqrt(resid @ resid)), {s: float(c) for s, c in zip(S, coef)}
