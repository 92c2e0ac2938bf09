"""Graph file formats and result serialisation.

Supported graph formats:

``edge-list``
    ``i j [w]`` per line, 0-indexed, ``#`` comments. The writer adds
    ``#! n <count>`` and ``#! v <node> <volume>`` directives so isolated
    nodes and non-unit volumes survive a round trip.
``metis``
    1-indexed adjacency lists with header ``n m [fmt]``; ``fmt`` digits
    select vertex weights (volumes) and edge weights. ``%`` comments.
``matrix-market``
    ``coordinate real|pattern|integer symmetric`` only, read through
    :func:`scipy.io.mmread`. ``%! v`` comment directives carry volumes.
"""

from __future__ import annotations

import io as _io
import logging
from typing import IO, Union

import numpy as np
import scipy.io
import scipy.sparse as sp

from .graph import GraphError, WeightedGraph, from_edges

log = logging.getLogger(__name__)

FORMATS = ("edge-list", "metis", "matrix-market")

Source = Union[str, bytes, IO]


class GraphParseError(GraphError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _as_text(data: Source) -> str:
    if hasattr(data, "read"):
        data = data.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data


def format_from_path(path: str) -> str:
    lower = path.lower()
    if lower.endswith((".metis", ".graph")):
        return "metis"
    if lower.endswith(".mtx"):
        return "matrix-market"
    return "edge-list"


def parse_graph(data: Source, fmt: str = "edge-list") -> WeightedGraph:
    text = _as_text(data)
    if fmt == "edge-list":
        g = _parse_edge_list(text)
    elif fmt == "metis":
        g = _parse_metis(text)
    elif fmt == "matrix-market":
        g = _parse_matrix_market(text)
    else:
        raise GraphError(f"unknown graph format {fmt!r}")
    if g.merged_duplicates:
        log.warning("merged %d duplicate edge(s)", g.merged_duplicates)
    if g.dropped_self_loops:
        log.warning("dropped %d self-loop(s)", g.dropped_self_loops)
    return g


def read_graph(path: str, fmt: str | None = None) -> WeightedGraph:
    with open(path, "rb") as fh:
        return parse_graph(fh, fmt or format_from_path(path))


def _parse_volume_directive(parts, lineno, volumes):
    try:
        node, vol = int(parts[2]), float(parts[3])
    except (IndexError, ValueError):
        raise GraphParseError("malformed volume directive", lineno) from None
    if vol <= 0:
        raise GraphParseError("volume must be positive", lineno)
    volumes[node] = vol


def _parse_edge_list(text: str) -> WeightedGraph:
    edges = []
    declared_n = None
    volumes: dict[int, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#!"):
            parts = line[2:].split()
            parts.insert(0, "#!")
            if len(parts) >= 3 and parts[1] == "n":
                declared_n = int(parts[2])
            elif len(parts) >= 2 and parts[1] == "v":
                _parse_volume_directive(parts, lineno, volumes)
            continue
        if line.startswith("#"):
            continue
        parts = line.split("#", 1)[0].split()
        if len(parts) not in (2, 3):
            raise GraphParseError(f"expected 'i j [w]', got {raw!r}", lineno)
        try:
            i, j = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise GraphParseError(f"non-numeric field in {raw!r}", lineno) from None
        if i < 0 or j < 0:
            raise GraphParseError("negative node id", lineno)
        if w < 0 or not np.isfinite(w):
            raise GraphParseError(f"invalid weight {w}", lineno)
        edges.append((i, j, w))
    n = max((max(i, j) for i, j, _ in edges), default=-1) + 1
    n = max(n, max(volumes, default=-1) + 1)
    if declared_n is not None:
        if declared_n < n:
            raise GraphParseError(f"declared n={declared_n} but node {n - 1} present")
        n = declared_n
    vol = np.ones(n)
    for node, v in volumes.items():
        vol[node] = v
    return from_edges(n, edges, vol)


def _parse_metis(text: str) -> WeightedGraph:
    lines = [
        (no, raw) for no, raw in enumerate(text.splitlines(), start=1)
        if not raw.lstrip().startswith("%")
    ]
    while lines and not lines[0][1].strip():
        lines.pop(0)
    if not lines:
        raise GraphParseError("missing METIS header")
    head_no, head = lines[0]
    header = head.split()
    try:
        n, m = int(header[0]), int(header[1])
    except (IndexError, ValueError):
        raise GraphParseError("header must be 'n m [fmt]'", head_no) from None
    fmt = header[2] if len(header) > 2 else "0"
    fmt = fmt.rjust(3, "0")
    has_vwgt, has_ewgt = fmt[1] == "1", fmt[2] == "1"
    if fmt[0] == "1":
        raise GraphParseError("vertex sizes (fmt 1xx) are not supported", head_no)
    body = lines[1:]
    # trailing blank lines beyond n are padding
    while len(body) > n and not body[-1][1].strip():
        body.pop()
    if len(body) != n:
        raise GraphParseError(f"expected {n} vertex lines, found {len(body)}", head_no)

    directed: dict[tuple[int, int], float] = {}
    edges = []
    volumes = np.ones(n)
    for u, (lineno, raw) in enumerate(body):
        try:
            tokens = [float(t) for t in raw.split()]
        except ValueError:
            raise GraphParseError(f"non-numeric token in {raw!r}", lineno) from None
        if has_vwgt:
            if not tokens:
                raise GraphParseError("missing vertex weight", lineno)
            volumes[u] = tokens.pop(0)
            if volumes[u] <= 0:
                raise GraphParseError("vertex weight must be positive", lineno)
        step = 2 if has_ewgt else 1
        if len(tokens) % step:
            raise GraphParseError("odd number of neighbor/weight tokens", lineno)
        for k in range(0, len(tokens), step):
            v = int(tokens[k]) - 1
            w = tokens[k + 1] if has_ewgt else 1.0
            if not 0 <= v < n:
                raise GraphParseError(f"neighbor {v + 1} out of range", lineno)
            if w < 0:
                raise GraphParseError(f"negative edge weight {w}", lineno)
            if (u, v) in directed:
                directed[(u, v)] += w
            else:
                directed[(u, v)] = w
            if u <= v:
                edges.append((u, v, w))
    for (u, v), w in directed.items():
        if u != v and not np.isclose(directed.get((v, u), -1.0), w):
            raise GraphParseError(f"adjacency not symmetric at edge ({u + 1}, {v + 1})")
    g = from_edges(n, edges, volumes)
    if g.num_edges != m:
        raise GraphParseError(f"header declares {m} edges, found {g.num_edges}", head_no)
    return g


def _parse_matrix_market(text: str) -> WeightedGraph:
    first = text.lstrip().splitlines()[0].lower() if text.strip() else ""
    if not first.startswith("%%matrixmarket"):
        raise GraphParseError("missing %%MatrixMarket banner", 1)
    banner = first.split()
    if len(banner) < 5 or banner[2] != "coordinate" or banner[4] != "symmetric":
        raise GraphParseError("only coordinate symmetric matrices are supported", 1)
    if banner[3] not in ("real", "pattern", "integer"):
        raise GraphParseError(f"unsupported field {banner[3]!r}", 1)
    volumes: dict[int, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw.startswith("%!"):
            parts = ["%!"] + raw[2:].split()
            if len(parts) >= 2 and parts[1] == "v":
                _parse_volume_directive(parts, lineno, volumes)
    try:
        mat = scipy.io.mmread(_io.StringIO(text))
    except Exception as exc:  # scipy raises assorted types
        raise GraphParseError(f"matrix-market read failed: {exc}") from exc
    mat = sp.coo_matrix(mat)
    if mat.shape[0] != mat.shape[1]:
        raise GraphParseError("matrix is not square")
    if np.any(mat.data < 0):
        raise GraphParseError("negative weight in matrix")
    n = mat.shape[0]
    upper = mat.row <= mat.col
    edges = zip(mat.row[upper], mat.col[upper], mat.data[upper])
    vol = np.ones(n)
    for node, v in volumes.items():
        vol[node] = v
    return from_edges(n, edges, vol)


def _fmt_num(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() and abs(x) < 1e15 else repr(x)


def serialize_graph(g: WeightedGraph, fmt: str = "edge-list") -> str:
    i, j, w = g.edges()
    out = []
    if fmt == "edge-list":
        out.append(f"#! n {g.n}")
        for node in np.nonzero(g.volumes != 1.0)[0]:
            out.append(f"#! v {node} {_fmt_num(g.volumes[node])}")
        out.extend(f"{a} {b} {_fmt_num(c)}" for a, b, c in zip(i, j, w))
    elif fmt == "metis":
        unit_vol = bool(np.all(g.volumes == 1.0))
        unit_w = bool(np.all(w == 1.0))
        code = ("0" if unit_vol else "1") + ("0" if unit_w else "1")
        out.append(f"{g.n} {g.num_edges}" + ("" if code == "00" else f" {code}"))
        for u in range(g.n):
            nbrs, ws = g.neighbors(u)
            tokens = [] if unit_vol else [_fmt_num(g.volumes[u])]
            for v, x in zip(nbrs, ws):
                tokens.append(str(v + 1))
                if not unit_w:
                    tokens.append(_fmt_num(x))
            out.append(" ".join(tokens))
    elif fmt == "matrix-market":
        out.append("%%MatrixMarket matrix coordinate real symmetric")
        for node in np.nonzero(g.volumes != 1.0)[0]:
            out.append(f"%! v {node} {_fmt_num(g.volumes[node])}")
        out.append(f"{g.n} {g.n} {g.num_edges}")
        # lower triangle, 1-indexed
        out.extend(f"{b + 1} {a + 1} {_fmt_num(c)}" for a, b, c in zip(i, j, w))
    else:
        raise GraphError(f"unknown graph format {fmt!r}")
    return "\n".join(out) + "\n"


def write_graph(g: WeightedGraph, path: str, fmt: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_graph(g, fmt or format_from_path(path)))


def format_ordering(order: np.ndarray, cost: float) -> str:
    """``node rank`` lines (rank 1-based) followed by ``# cost <value>``."""
    rank = np.empty(len(order), dtype=int)
    rank[np.asarray(order)] = np.arange(1, len(order) + 1)
    lines = [f"{node} {rank[node]}" for node in range(len(order))]
    lines.append(f"# cost {cost:.6g}")
    return "\n".join(lines) + "\n"


def format_bipartition(side: np.ndarray, cut: float) -> str:
    lines = [f"{node} {int(s)}" for node, s in enumerate(side)]
    lines.append(f"# cost {cut:.6g}")
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> tuple[np.ndarray, float | None]:
    """Parse a solution file back to ``(values per node, cost)``."""
    values, cost = {}, None
    for raw in text.splitlines():
        if raw.startswith("# cost"):
            cost = float(raw.split()[2])
        elif raw.strip() and not raw.startswith("#"):
            node, val = raw.split()
            values[int(node)] = int(val)
    return np.array([values[k] for k in range(len(values))]), cost
