import io
import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algcoarsen.graph import from_edges, generate_mesh2d, random_graph
from algcoarsen.io import (
    FORMATS,
    GraphParseError,
    format_bipartition,
    format_ordering,
    parse_graph,
    parse_solution,
    read_graph,
    serialize_graph,
    write_graph,
)
from oracles import edge_dict


def test_edge_list_basic():
    g = parse_graph("0 1 1.0\n1 2 2.0", "edge-list")
    assert g.n == 3 and g.num_edges == 2
    assert g.weight(1, 2) == 2.0


def test_edge_list_merge_warning(caplog):
    with caplog.at_level(logging.WARNING):
        g = parse_graph("0 1 1.0\n1 0 2.0\n", "edge-list")
    assert g.num_edges == 1 and g.weight(0, 1) == 3.0
    assert g.merged_duplicates == 1
    assert "merged 1 duplicate" in caplog.text


def test_edge_list_self_loop_dropped(caplog):
    with caplog.at_level(logging.WARNING):
        g = parse_graph("0 0 1\n0 1 1\n", "edge-list")
    assert g.num_edges == 1 and g.dropped_self_loops == 1
    assert "self-loop" in caplog.text


def test_edge_list_comments_directives_bytes():
    text = b"# header\n#! n 5\n#! v 2 3.5\n0 1\n1 2 0.5 # trailing\n"
    g = parse_graph(io.BytesIO(text), "edge-list")
    assert g.n == 5
    assert g.volumes[2] == 3.5
    assert g.weight(0, 1) == 1.0


def test_metis_weighted_path_matches_edge_list():
    metis = parse_graph("3 2 1\n2 1\n1 1 3 2\n2 2\n", "metis")
    edge = parse_graph("0 1 1.0\n1 2 2.0", "edge-list")
    assert edge_dict(metis) == edge_dict(edge) == {(0, 1): 1.0, (1, 2): 2.0}


def test_metis_unweighted_and_vertex_weights():
    g = parse_graph("% comment\n3 2\n2\n1 3\n2\n", "metis")
    assert edge_dict(g) == {(0, 1): 1.0, (1, 2): 1.0}
    g = parse_graph("3 2 011\n2 2 5\n1 1 5 3 7\n4 2 7\n", "metis")
    np.testing.assert_array_equal(g.volumes, [2, 1, 4])
    assert edge_dict(g) == {(0, 1): 5.0, (1, 2): 7.0}


@pytest.mark.parametrize(
    "text,fmt,line",
    [
        ("0 1 x\n", "edge-list", 1),
        ("0 1 1\n0 1 2 3\n", "edge-list", 2),
        ("0 1 -2\n", "edge-list", 1),
        ("3 2\n2\n1\n", "metis", 1),  # missing a vertex line
        ("3 2\n2\n1 3\nz\n", "metis", 4),
        ("2 1 1\n2 -1\n1 -1\n", "metis", 2),
    ],
)
def test_parse_errors_carry_line(text, fmt, line):
    with pytest.raises(GraphParseError) as exc:
        parse_graph(text, fmt)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_metis_asymmetric_rejected():
    with pytest.raises(GraphParseError, match="symmetric"):
        parse_graph("3 2 1\n2 1\n1 1 3 2\n2 5\n", "metis")


def test_metis_edge_count_checked():
    with pytest.raises(GraphParseError, match="declares"):
        parse_graph("3 5\n2\n1 3\n2\n", "metis")


def test_matrix_market():
    text = (
        "%%MatrixMarket matrix coordinate real symmetric\n"
        "%! v 0 2.0\n"
        "3 3 3\n2 1 1.5\n3 2 2.0\n1 1 9.0\n"
    )
    g = parse_graph(text, "matrix-market")
    assert edge_dict(g) == {(0, 1): 1.5, (1, 2): 2.0}
    assert g.volumes[0] == 2.0
    assert g.dropped_self_loops == 1


def test_matrix_market_rejects_general():
    with pytest.raises(GraphParseError):
        parse_graph("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 1\n", "matrix-market")


def _same(a, b):
    assert a.n == b.n
    assert edge_dict(a) == edge_dict(b)
    np.testing.assert_array_equal(a.volumes, b.volumes)


@pytest.mark.parametrize("fmt", FORMATS)
def test_round_trip_fixed(fmt):
    g = from_edges(5, [(0, 1, 0.1), (1, 2, 3.0), (3, 4, 2.5)], volumes=np.array([1, 2.5, 1, 1, 0.3]))
    _same(parse_graph(serialize_graph(g, fmt), fmt), g)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 20), st.floats(0.0, 1.0), st.integers(0, 2**32 - 1), st.sampled_from(FORMATS))
def test_round_trip_random(n, p, seed, fmt):
    rng = np.random.default_rng(seed)
    g = random_graph(n, p, rng, weighted=True)
    _same(parse_graph(serialize_graph(g, fmt), fmt), g)


def test_serializer_order_and_files(tmp_path):
    g = from_edges(3, [(2, 1, 1.0), (1, 0, 2.0)])
    text = serialize_graph(g, "edge-list")
    body = [line for line in text.splitlines() if not line.startswith("#")]
    assert body == ["0 1 2", "1 2 1"]
    for ext in ("txt", "metis", "mtx"):
        path = tmp_path / f"g.{ext}"
        write_graph(g, str(path))
        assert b"\r\n" not in path.read_bytes()
        _same(read_graph(str(path)), g)


def test_mesh_round_trip_metis():
    g = generate_mesh2d(5, 6)
    _same(parse_graph(serialize_graph(g, "metis"), "metis"), g)


def test_solution_formats():
    text = format_ordering(np.array([2, 0, 1]), 4.0)
    assert text.splitlines() == ["0 2", "1 3", "2 1", "# cost 4"]
    ranks, cost = parse_solution(text)
    np.testing.assert_array_equal(ranks, [2, 3, 1])
    assert cost == 4.0
    sides, cut = parse_solution(format_bipartition(np.array([1, 2, 2]), 1.5))
    np.testing.assert_array_equal(sides, [1, 2, 2])
    assert cut == 1.5
