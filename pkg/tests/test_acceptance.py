"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line."""

import numpy as np
import pytest

from algcoarsen import bench
from algcoarsen.algdist import RelaxParams
from algcoarsen.cli import main
from algcoarsen.coarsen import CoarsenParams, build_coarse_graph, build_hierarchy, coarsen_once
from algcoarsen.corpus import IRREGULAR, load_corpus_graph
from algcoarsen.graph import from_arrays, is_connected, random_graph
from algcoarsen.solvers import (
    Arrangement,
    cut_cost,
    multilevel_bisection,
    psum_cost,
    refine_ordering,
    solve_bisection,
    solve_ordering,
)
from algcoarsen.algdist import scaled_distance
from oracles import (
    best_balanced_cut,
    best_ordering_cost,
    contract,
    edge_dict,
    edge_scan_cut,
    eta_grid_min,
    permutation_cost,
)

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def mesh_tables():
    cfg = bench.Table1Config()
    cells1, cells2 = bench.mesh_statistics(cfg)
    key = lambda c: (c.K, c.r, c.w_ij)
    return {key(c): c for c in cells1}, {key(c): c for c in cells2}, cfg


def test_criterion_1_table1_trends(mesh_tables, report):
    t1, _, cfg = mesh_tables
    assert len(t1) == 48
    m1 = t1[(10, 20, 1.0)].mean
    m4 = t1[(10, 20, 4.0)].mean
    monotone = all(
        t1[(K, r, a)].mean >= t1[(K, r, b)].mean
        for K in cfg.K_values
        for r in cfg.r_values
        for a, b in zip(cfg.w_ij_values, cfg.w_ij_values[1:])
    )
    std_wins = sum(
        t1[(10, r, w)].std < t1[(1, r, w)].std for r in cfg.r_values for w in cfg.w_ij_values
    )
    ok = 0.7 <= m1 <= 1.5 and -0.4 <= m4 <= 0.4 and monotone and std_wins >= 15
    report(
        "1 table1",
        ok,
        f"mean(K=10,r=20,w=1)={m1:.4f} in [0.7,1.5]; mean(w=4)={m4:.4f} in [-0.4,0.4]; "
        f"non-increasing in w: {monotone}; K=10 std < K=1 std in {std_wins}/16",
    )
    assert ok


def test_criterion_2_table2_trends(mesh_tables, report):
    _, t2, cfg = mesh_tables
    positive = sum(
        t2[(K, r, w)].mean > 0 for K in (5, 10) for r in cfg.r_values for w in cfg.w_ij_values
    )
    frac = t2[(10, 20, 4.0)].positive_fraction
    ok = positive == 32 and frac >= 0.85
    report(
        "2 table2",
        ok,
        f"positive means for K in {{5,10}}: {positive}/32; positive fraction (K=10,r=20,w=4)={frac:.2f} >= 0.85",
    )
    assert ok


def test_criterion_3_extra_edge_safeguard(report):
    cfg = bench.Table1Config()
    relax = bench.extra_edge_safeguard(cfg, "relaxation", 1.0, runs=100)
    classical = bench.extra_edge_safeguard(cfg, "classical", 4.0, runs=100)
    ok = relax.with_neighbor >= 95 and classical.with_j >= 50
    report(
        "3 extra-edge safeguard",
        ok,
        f"relaxation w=1: i joins a mesh neighbor first in {relax.with_neighbor}/100 (>=95); "
        f"classical w=4: i joins j first in {classical.with_j}/100 (>=50)",
    )
    assert ok


def test_criterion_4_comparison_direction(report):
    graphs = {name: load_corpus_graph(name) for name in IRREGULAR}
    assert len(graphs) >= 6 and all(500 <= g.n <= 5000 for g in graphs.values())
    cfg = bench.CompareConfig(problem="m2sp", calibers=(1,), runs=100, seed=42)
    rows, failures = bench.bench_compare(graphs, cfg)
    assert not failures
    ratios = [r.ratio_before for r in rows]
    share = np.mean([x > 1 for x in ratios])
    gmean = bench.geometric_mean(ratios)
    ok = share >= 0.6 and gmean > 1
    detail = ", ".join(f"{r.graph}={r.ratio_before:.3f}" for r in rows)
    report("4 compare", ok, f"ratio_before>1 on {share:.0%} (>=60%); geometric mean {gmean:.4f} (>1); {detail}")
    assert ok


def test_criterion_5_oracle_equivalences(report):
    rng = np.random.default_rng(5050)
    contraction_ok = 0
    for trial in range(50):
        n = int(rng.integers(5, 31))
        base = random_graph(n, float(rng.uniform(0.1, 0.5)), rng)
        i, j, _ = base.edges()
        g = from_arrays(n, i, j, rng.integers(1, 6, i.size).astype(float))
        mode = ("relaxation", "classical", "algebraic-only")[trial % 3]
        _, interp = coarsen_once(g, CoarsenParams(coupling_mode=mode, relax=RelaxParams(K=5, r=5, seed=trial)))
        groups = interp.P.toarray().argmax(axis=1).tolist()
        expected_edges, expected_vol = contract(g, groups)
        cg = build_coarse_graph(g, interp.P)
        contraction_ok += edge_dict(cg) == expected_edges and np.array_equal(cg.volumes, expected_vol)

    psum_ok = 0
    for _ in range(50):
        n = int(rng.integers(2, 51))
        base = random_graph(n, float(rng.uniform(0.05, 0.5)), rng)
        i, j, _ = base.edges()
        g = from_arrays(n, i, j, rng.integers(1, 9, i.size).astype(float))
        order = rng.permutation(n)
        psum_ok += all(psum_cost(g, order, p) == permutation_cost(g, order, p) for p in (1, 2))

    cut_ok = 0
    for _ in range(50):
        n = int(rng.integers(2, 40))
        base = random_graph(n, 0.3, rng)
        i, j, _ = base.edges()
        g = from_arrays(n, i, j, rng.integers(1, 9, i.size).astype(float))
        side = rng.integers(1, 3, n)
        cut_ok += cut_cost(g, side) == edge_scan_cut(g, side)

    eta_ok = 0
    for _ in range(100):
        a, b = rng.normal(size=(2, 10))
        exact, grid = scaled_distance(a, b, 2), eta_grid_min(a, b)
        eta_ok += abs(exact - grid) <= 1e-6 * max(abs(grid), 1e-300)

    ok = contraction_ok == 50 and psum_ok == 50 and cut_ok == 50 and eta_ok == 100
    report(
        "5 oracles",
        ok,
        f"contraction {contraction_ok}/50 exact; psum {psum_ok}/50 exact; cut {cut_ok}/50 exact; "
        f"eta closed form {eta_ok}/100 within 1e-6",
    )
    assert ok


def _cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    assert code == 0
    return out


def test_criterion_6_invariants(report, tmp_path, capsys):
    rng = np.random.default_rng(606)
    row_err = vol_err = 0.0
    for seed in range(30):
        g = random_graph(int(rng.integers(30, 150)), 0.05, rng, weighted=True)
        h = build_hierarchy(g, CoarsenParams(caliber=1 + seed % 2, relax=RelaxParams(seed=seed)))
        total = g.volumes.sum()
        for lv in h.levels:
            vol_err = max(vol_err, abs(lv.graph.volumes.sum() - total) / total)
            if lv.interp is not None:
                row_err = max(row_err, np.abs(np.asarray(lv.interp.P.sum(axis=1)).ravel() - 1).max())

    violations = 0
    for seed in range(100):
        r = np.random.default_rng(seed)
        g = random_graph(int(r.integers(60, 200)), 0.04, r, weighted=True)
        params = CoarsenParams(relax=RelaxParams(seed=seed))
        res = solve_ordering(g, 1 + seed % 2, params)
        violations += res.cost_after_post > res.cost_before_post + 1e-9 * res.cost_before_post
        _, history = refine_ordering(g, Arrangement(r.permutation(g.n), g.volumes), 2, 6)
        violations += sum(b > a + 1e-9 * a for a, b in zip(history, history[1:]))
        if g.n >= 2:
            _, before, after = multilevel_bisection(g, 0.05, params)
            violations += after > before + 1e-9

    graph = tmp_path / "g.txt"
    graph.write_text(
        "".join(f"{a} {b} {w:g}\n" for (a, b), w in edge_dict(load_corpus_graph("chords-24x24")).items())
    )
    runs = [
        ["solve", "m2sp", str(graph), "--seed", "9"],
        ["solve", "bisect", str(graph), "--seed", "9"],
        ["bench", "compare", "--runs", "2", "--seed", "9"],
        ["bench", "table2", "--runs", "3", "--seed", "9"],
    ]
    same_twice = all(_cli(a, capsys) == _cli(a, capsys) for a in runs)
    same_threads = all(
        _cli(a + ["--threads", "1"], capsys) == _cli(a + ["--threads", "3"], capsys) for a in runs[2:]
    )

    ok = row_err <= 1e-12 and vol_err <= 1e-9 and violations == 0 and same_twice and same_threads
    report(
        "6 invariants",
        ok,
        f"max |P row sum - 1|={row_err:.1e}; max volume drift={vol_err:.1e}; "
        f"monotonicity violations={violations}/100 runs; byte-identical reruns={same_twice}; "
        f"thread-count independent={same_threads}",
    )
    assert ok


def _connected_corpus(count, rng):
    graphs = []
    while len(graphs) < count:
        n = int(rng.integers(3, 9))
        base = random_graph(n, float(rng.uniform(0.3, 0.8)), rng)
        if not is_connected(base):
            continue
        i, j, _ = base.edges()
        graphs.append(from_arrays(n, i, j, rng.integers(1, 4, i.size).astype(float)))
    return graphs


def test_criterion_7_small_exactness(report):
    graphs = _connected_corpus(200, np.random.default_rng(707))
    bis_hits = ord_hits = 0
    for k, g in enumerate(graphs):
        params = CoarsenParams(relax=RelaxParams(seed=k))
        cut = solve_bisection(g, 0.2, params).cut
        bis_hits += abs(cut - best_balanced_cut(g, 0.2)) <= 1e-9
        p = 1 + k % 2
        cost = solve_ordering(g, p, params).cost_after_post
        ord_hits += abs(cost - best_ordering_cost(g, p)) <= 1e-9 * max(1.0, cost)
    ok = bis_hits >= 190 and ord_hits >= 180
    report(
        "7 small exactness",
        ok,
        f"bisection optimal in {bis_hits}/200 (>=190); ordering optimal in {ord_hits}/200 (>=180)",
    )
    assert ok
