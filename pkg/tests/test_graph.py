import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algcoarsen.graph import (
    GraphError,
    LaplacianView,
    add_edge,
    from_edges,
    generate_mesh2d,
    laplacian_row_apply,
    path_graph,
    random_graph,
)


@pytest.mark.parametrize("rows,cols,n,m", [(2, 2, 4, 4), (3, 3, 9, 12), (33, 33, 1089, 2112)])
def test_mesh_counts(rows, cols, n, m):
    g = generate_mesh2d(rows, cols)
    assert (g.n, g.num_edges) == (n, m)
    assert m == 2 * rows * cols - rows - cols


def test_mesh_degrees_and_ids():
    g = generate_mesh2d(4, 5)
    deg = g.degree().reshape(4, 5)
    assert {deg[0, 0], deg[0, 4], deg[3, 0], deg[3, 4]} == {2}
    assert set(deg[0, 1:4]) == {3} and set(deg[1:3, 0]) == {3}
    assert set(deg[1:3, 1:4].ravel()) == {4}
    assert g.weight(1 * 5 + 2, 2 * 5 + 2) == 1.0
    assert np.all(g.volumes == 1.0)


def test_mesh_rejects_small():
    with pytest.raises(GraphError):
        generate_mesh2d(1, 5)


def test_add_edge_new_and_existing():
    g = generate_mesh2d(3, 3)
    assert add_edge(g, 0, 5, 2.0).num_edges == 13
    h = add_edge(g, 0, 1, 1.0)
    assert h.num_edges == 12
    assert h.weight(0, 1) == h.weight(1, 0) == 2.0
    with pytest.raises(GraphError):
        add_edge(g, 3, 3, 1.0)


def test_from_edges_merges_and_drops_loops():
    g = from_edges(3, [(0, 1, 1.0), (1, 0, 2.0), (2, 2, 5.0)])
    assert g.num_edges == 1
    assert g.weight(0, 1) == 3.0
    assert g.merged_duplicates == 1 and g.dropped_self_loops == 1


@pytest.mark.parametrize("edges", [[(0, 1, -1.0)], [(0, 3, 1.0)]])
def test_from_edges_validation(edges):
    with pytest.raises(GraphError):
        from_edges(2, edges)


def test_volumes_validated():
    with pytest.raises(GraphError):
        from_edges(2, [(0, 1, 1.0)], volumes=np.array([1.0, 0.0]))


def test_laplacian_row_examples():
    g = path_graph(2)
    assert laplacian_row_apply(g, np.array([0.0, 1.0]), 0) == -1.0
    mesh = generate_mesh2d(3, 3)
    for i in range(9):
        assert laplacian_row_apply(mesh, np.full(9, 3.7), i) == 0.0


def test_laplacian_matches_dense_oracle():
    rng = np.random.default_rng(5)
    g = generate_mesh2d(3, 3)
    W = g.adjacency.toarray()
    A = np.diag(W.sum(axis=1)) - W
    x = rng.normal(size=9)
    ax = A @ x
    for i in range(9):
        assert laplacian_row_apply(g, x, i) == pytest.approx(ax[i], abs=1e-12)
    view = LaplacianView(g)
    np.testing.assert_allclose(view.apply(x), ax, atol=1e-12)
    np.testing.assert_allclose(view.toarray(), A)
    assert np.all(view.diagonal > 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 25), st.floats(0.05, 0.9), st.integers(0, 2**32 - 1))
def test_laplacian_zero_sum(n, p, seed):
    rng = np.random.default_rng(seed)
    g = random_graph(n, p, rng, weighted=True)
    x = rng.normal(size=n)
    ax = LaplacianView(g).apply(x)
    scale = max(1.0, float(np.abs(ax).sum()))
    assert abs(ax.sum()) <= 1e-9 * scale
    A = LaplacianView(g).toarray()
    np.testing.assert_allclose(A.sum(axis=1), 0.0, atol=1e-12)


def test_symmetry_and_edges_order():
    rng = np.random.default_rng(1)
    g = random_graph(15, 0.3, rng, weighted=True)
    assert (g.adjacency != g.adjacency.T).nnz == 0
    i, j, w = g.edges()
    assert np.all(i < j)
    keys = list(zip(i.tolist(), j.tolist()))
    assert keys == sorted(keys)
    assert np.all(w > 0)


def test_components_and_subgraph():
    g = from_edges(5, [(0, 1, 1.0), (3, 4, 2.0)])
    ncomp, labels = g.components()
    assert ncomp == 3
    sub = g.subgraph(np.array([3, 4]))
    assert sub.n == 2 and sub.weight(0, 1) == 2.0


def test_scaled_graph():
    g = generate_mesh2d(3, 3).scaled(2.5)
    assert np.all(g.weights == 2.5)
