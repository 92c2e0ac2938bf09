"""Deterministic benchmark graphs.

The comparison harness runs on a small self-contained corpus: plain
meshes, random regular graphs, preferential-attachment (power-law)
graphs, and meshes with random long-range chords that mimic the
irregular circuit graphs where algebraic couplings help most.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .graph import WeightedGraph, from_arrays, generate_mesh2d
from .io import parse_graph, serialize_graph

CORPUS_SEED = 20100


def mesh_with_chords(rows: int, cols: int, chords: int, rng: np.random.Generator) -> WeightedGraph:
    """Unit mesh plus ``chords`` random nonlocal edges of weight 1 to 3."""
    mesh = generate_mesh2d(rows, cols)
    n = rows * cols
    i, j, w = mesh.edges()
    a = rng.integers(0, n, chords)
    b = rng.integers(0, n, chords)
    cw = rng.integers(1, 4, chords).astype(float)
    return from_arrays(n, np.r_[i, a], np.r_[j, b], np.r_[w, cw])


def preferential_attachment(n: int, m: int, rng: np.random.Generator) -> WeightedGraph:
    """Barabasi-Albert graph: each new node links to ``m`` degree-biased targets."""
    src, dst = [], []
    targets = list(range(m))
    repeated: list[int] = []
    for new in range(m, n):
        for t in set(targets):
            src.append(new)
            dst.append(t)
        repeated.extend(targets)
        repeated.extend([new] * m)
        picks = rng.integers(0, len(repeated), 3 * m)
        chosen: list[int] = []
        for p in picks:
            node = repeated[p]
            if node not in chosen:
                chosen.append(node)
            if len(chosen) == m:
                break
        targets = chosen
    return from_arrays(n, np.array(src), np.array(dst), np.ones(len(src)))


def random_regular(n: int, d: int, rng: np.random.Generator) -> WeightedGraph:
    """Configuration-model d-regular graph (loops and repeats discarded)."""
    stubs = np.repeat(np.arange(n), d)
    rng.shuffle(stubs)
    a, b = stubs[0::2], stubs[1::2]
    return from_arrays(n, a, b, np.ones(a.size))


def _largest_component(g: WeightedGraph) -> WeightedGraph:
    ncomp, labels = g.components()
    if ncomp == 1:
        return g
    big = np.argmax(np.bincount(labels))
    return g.subgraph(np.nonzero(labels == big)[0])


def build_corpus(seed: int = CORPUS_SEED) -> dict[str, WeightedGraph]:
    """All corpus graphs by name; irregular ones are prefixed ``chords-`` / ``powerlaw-``."""
    rng = np.random.default_rng(seed)
    graphs = {
        "chords-24x24": mesh_with_chords(24, 24, 40, rng),
        "chords-30x30": mesh_with_chords(30, 30, 60, rng),
        "chords-32x40": mesh_with_chords(32, 40, 120, rng),
        "powerlaw-600-2": preferential_attachment(600, 2, rng),
        "powerlaw-900-2": preferential_attachment(900, 2, rng),
        "powerlaw-1200-3": preferential_attachment(1200, 3, rng),
        "mesh-30x30": generate_mesh2d(30, 30),
        "regular-800-4": random_regular(800, 4, rng),
    }
    return {name: _largest_component(g) for name, g in graphs.items()}


IRREGULAR = (
    "chords-24x24",
    "chords-30x30",
    "chords-32x40",
    "powerlaw-600-2",
    "powerlaw-900-2",
    "powerlaw-1200-3",
)


def corpus_files() -> dict[str, str]:
    """Bundled edge-list files (name -> path)."""
    root = resources.files("algcoarsen") / "data"
    return {p.name[:-4]: str(p) for p in sorted(root.iterdir()) if p.name.endswith(".txt")}


def load_corpus_graph(name: str) -> WeightedGraph:
    path = corpus_files()[name]
    with open(path, "rb") as fh:
        return parse_graph(fh, "edge-list")


def write_corpus(directory: str, seed: int = CORPUS_SEED) -> list[str]:
    import os

    os.makedirs(directory, exist_ok=True)
    paths = []
    for name, g in build_corpus(seed).items():
        path = os.path.join(directory, f"{name}.txt")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(serialize_graph(g, "edge-list"))
        paths.append(path)
    return paths
