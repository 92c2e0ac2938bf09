"""Seeded experiments: mesh distance statistics and coarsening comparisons.

All randomness flows from one master seed. Work is split into
independent tasks that may run in worker processes; results are joined
in task order, so output does not depend on the worker count.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .algdist import RelaxParams, edge_algebraic_distance, relax_test_vectors
from .coarsen import CoarsenParams, build_hierarchy
from .graph import WeightedGraph, add_edge, generate_mesh2d
from .solvers import multilevel_bisection, solve_ordering

log = logging.getLogger(__name__)

TABLE1_HEADER = "K,r,w_ij,mean_ln_ratio,std_ln_ratio"
TABLE2_HEADER = "K,r,w_ij,mean_ln_ratio,std_ln_ratio,positive_fraction"
COMPARE_HEADER = "graph,problem,caliber,ratio_before,ratio_after,runs"
PROBLEMS = {"m2sp": 2, "mla": 1, "bisect": None}


def fmt6(x: float) -> str:
    return f"{x:.6g}"


def run_tasks(fn: Callable, tasks: Sequence, threads: int = 1) -> list:
    """Map ``fn`` over ``tasks`` keeping task order."""
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def sample_std(values: np.ndarray) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


@dataclass(frozen=True)
class Table1Config:
    """Mesh with one extra edge between interior nodes ``i`` and ``j``.

    ``i`` sits at (``row``, ``col``), ``j`` lies ``separation`` steps to
    its right, and ``q`` is the neighbor of ``i`` on the side away from
    ``j``.
    """

    mesh_rows: int = 33
    mesh_cols: int = 33
    row: int = 16
    col: int = 14
    separation: int = 5
    w_ij_values: tuple = (1.0, 2.0, 3.0, 4.0)
    K_values: tuple = (1, 5, 10)
    r_values: tuple = (10, 20, 50, 100)
    runs: int = 100
    seed: int = 42
    kind: str = "max-norm"
    normalize: str = "none"
    omega: float = 0.5

    def __post_init__(self):
        i_r, i_c = self.row, self.col
        j_c = self.col + self.separation
        for r, c in ((i_r, i_c), (i_r, j_c)):
            if not (0 < r < self.mesh_rows - 1 and 0 < c < self.mesh_cols - 1):
                raise ValueError("i and j must be interior mesh nodes")
        if self.separation < 5:
            raise ValueError("i and j must be at least 5 mesh steps apart")

    @property
    def i(self) -> int:
        return self.row * self.mesh_cols + self.col

    @property
    def j(self) -> int:
        return self.row * self.mesh_cols + self.col + self.separation

    @property
    def q(self) -> int:
        return self.row * self.mesh_cols + self.col - 1

    def graph(self, w_ij: float) -> WeightedGraph:
        return add_edge(generate_mesh2d(self.mesh_rows, self.mesh_cols), self.i, self.j, w_ij)


def _mesh_cell(task) -> tuple[np.ndarray, np.ndarray]:
    cfg, K, r, w = task
    g = cfg.graph(w)
    i, j, q = cfg.i, cfg.j, cfg.q
    nb_i = [int(s) for s in g.neighbors(i)[0] if s != j]
    nb_q = [int(s) for s in g.neighbors(q)[0] if s != i]
    diag = np.empty(cfg.runs)
    off = np.empty(cfg.runs)
    for run in range(cfg.runs):
        p = RelaxParams(K=K, r=r, omega=cfg.omega, seed=(cfg.seed, run), normalize=cfg.normalize)
        tv = relax_test_vectors(g, p)

        def d(a, b):
            return edge_algebraic_distance(tv, a, b, cfg.kind)

        diag[run] = math.log(d(i, j) / min(d(i, s) for s in nb_i))
        off[run] = math.log(d(q, i) / min(d(q, s) for s in nb_q))
    return diag, off


@dataclass
class MeshCell:
    K: int
    r: int
    w_ij: float
    ln_ratios: np.ndarray

    @property
    def mean(self) -> float:
        return float(np.mean(self.ln_ratios))

    @property
    def std(self) -> float:
        return sample_std(self.ln_ratios)

    @property
    def positive_fraction(self) -> float:
        return float(np.mean(self.ln_ratios > 0))


def mesh_statistics(cfg: Table1Config, threads: int = 1) -> tuple[list[MeshCell], list[MeshCell]]:
    """Per-cell ``ln(d_ij/d_i*)`` and ``ln(d_qi/d_q^i*)`` samples.

    Run ``k`` of every cell draws its initial vectors from seed
    ``(seed, k)``, so cells differing only in ``w_ij`` are paired.
    """
    keys = [(K, r, w) for K in cfg.K_values for r in cfg.r_values for w in cfg.w_ij_values]
    results = run_tasks(_mesh_cell, [(cfg,) + key for key in keys], threads)
    table1 = [MeshCell(K, r, w, diag) for (K, r, w), (diag, _) in zip(keys, results)]
    table2 = [MeshCell(K, r, w, off) for (K, r, w), (_, off) in zip(keys, results)]
    return table1, table2


def bench_table1(cfg: Table1Config, threads: int = 1) -> list[MeshCell]:
    return mesh_statistics(cfg, threads)[0]


def bench_table2(cfg: Table1Config, threads: int = 1) -> list[MeshCell]:
    return mesh_statistics(cfg, threads)[1]


def table1_csv(cells: Iterable[MeshCell]) -> str:
    lines = [TABLE1_HEADER]
    lines += [f"{c.K},{c.r},{fmt6(c.w_ij)},{fmt6(c.mean)},{fmt6(c.std)}" for c in cells]
    return "\n".join(lines) + "\n"


def table2_csv(cells: Iterable[MeshCell]) -> str:
    lines = [TABLE2_HEADER]
    lines += [
        f"{c.K},{c.r},{fmt6(c.w_ij)},{fmt6(c.mean)},{fmt6(c.std)},{fmt6(c.positive_fraction)}"
        for c in cells
    ]
    return "\n".join(lines) + "\n"


def aggregation_partner(h, i: int, j: int, mesh_neighbors: Sequence[int]) -> str | None:
    """Who node ``i`` first shares a coarse aggregate with.

    Walks the hierarchy upward. Returns ``"j"`` if ``j`` joins ``i`` at
    the first level where ``i`` shares an aggregate with ``j`` or any mesh
    neighbor (ties count as ``"j"``), ``"neighbor"`` if a mesh neighbor
    comes strictly first, and ``None`` if ``i`` stays alone throughout.
    """
    for level in range(1, len(h)):
        m = h.membership(level)
        if m[i] == m[j]:
            return "j"
        if any(m[i] == m[s] for s in mesh_neighbors):
            return "neighbor"
    return None


@dataclass
class SafeguardResult:
    mode: str
    w_ij: float
    runs: int
    partners: list = field(default_factory=list)

    @property
    def with_j(self) -> int:
        return sum(p == "j" for p in self.partners)

    @property
    def with_neighbor(self) -> int:
        return sum(p == "neighbor" for p in self.partners)


def _safeguard_run(task) -> str | None:
    cfg, mode, w, caliber, run, K, r = task
    g = cfg.graph(w)
    relax = RelaxParams(K=K, r=r, seed=(cfg.seed, run))
    h = build_hierarchy(g, CoarsenParams(caliber=caliber, coupling_mode=mode, relax=relax))
    nb = [int(s) for s in g.neighbors(cfg.i)[0] if s != cfg.j]
    return aggregation_partner(h, cfg.i, cfg.j, nb)


def extra_edge_safeguard(
    cfg: Table1Config,
    mode: str,
    w_ij: float,
    runs: int = 100,
    caliber: int = 1,
    K: int = 10,
    r: int = 20,
    threads: int = 1,
) -> SafeguardResult:
    """Count how often ``i`` aggregates with ``j`` rather than a mesh neighbor."""
    tasks = [(cfg, mode, w_ij, caliber, run, K, r) for run in range(runs)]
    return SafeguardResult(mode, w_ij, runs, run_tasks(_safeguard_run, tasks, threads))


@dataclass
class ComparisonRow:
    graph: str
    problem: str
    caliber: int
    ratio_before: float
    ratio_after: float
    runs: int

    def csv(self) -> str:
        return (
            f"{self.graph},{self.problem},{self.caliber},"
            f"{fmt6(self.ratio_before)},{fmt6(self.ratio_after)},{self.runs}"
        )


@dataclass(frozen=True)
class CompareConfig:
    problem: str = "m2sp"
    calibers: tuple = (1,)
    runs: int = 100
    seed: int = 42
    baseline: str = "classical"
    candidate: str = "relaxation"
    K: int = 10
    r: int = 20
    alpha: float = 0.03
    post_sweeps: int = 10
    intermediate_sweeps: int = 0


def _compare_run(task) -> tuple[float, float]:
    g, cfg, mode, caliber, run = task
    params = CoarsenParams(
        caliber=caliber,
        coupling_mode=mode,
        relax=RelaxParams(K=cfg.K, r=cfg.r, seed=(cfg.seed, run)),
    )
    if cfg.problem == "bisect":
        _, before, after = multilevel_bisection(g, cfg.alpha, params)
        return before, after
    res = solve_ordering(
        g, PROBLEMS[cfg.problem], params, cfg.post_sweeps, cfg.intermediate_sweeps
    )
    return res.cost_before_post, res.cost_after_post


def compare_graph(name: str, g: WeightedGraph, cfg: CompareConfig, caliber: int, threads: int = 1) -> ComparisonRow:
    """Ratio of mean baseline cost to mean candidate cost (> 1: candidate wins)."""
    means = {}
    for mode in (cfg.baseline, cfg.candidate):
        tasks = [(g, cfg, mode, caliber, run) for run in range(cfg.runs)]
        costs = np.array(run_tasks(_compare_run, tasks, threads))
        means[mode] = costs.mean(axis=0)
    base, cand = means[cfg.baseline], means[cfg.candidate]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(cand > 0, base / cand, np.where(base > 0, np.inf, 1.0))
    return ComparisonRow(name, cfg.problem, caliber, float(ratio[0]), float(ratio[1]), cfg.runs)


def bench_compare(
    graphs: dict[str, WeightedGraph | Callable[[], WeightedGraph]],
    cfg: CompareConfig,
    threads: int = 1,
) -> tuple[list[ComparisonRow], list[tuple[str, str]]]:
    """Compare coupling modes on every graph; failures are collected, not raised."""
    if cfg.problem not in PROBLEMS:
        raise ValueError(f"unknown problem {cfg.problem!r}")
    rows, failures = [], []
    for name, g in graphs.items():
        try:
            graph = g() if callable(g) else g
            for caliber in cfg.calibers:
                rows.append(compare_graph(name, graph, cfg, caliber, threads))
        except Exception as exc:  # per-graph isolation
            log.error("graph %s failed: %s", name, exc)
            failures.append((name, str(exc)))
    return rows, failures


def compare_csv(rows: Iterable[ComparisonRow]) -> str:
    return "\n".join([COMPARE_HEADER] + [row.csv() for row in rows]) + "\n"


def geometric_mean(values: Iterable[float]) -> float:
    values = np.asarray(list(values), dtype=float)
    return float(np.exp(np.mean(np.log(values))))


__all__ = [
    "Table1Config",
    "CompareConfig",
    "ComparisonRow",
    "MeshCell",
    "bench_table1",
    "bench_table2",
    "bench_compare",
    "extra_edge_safeguard",
    "aggregation_partner",
    "mesh_statistics",
]
