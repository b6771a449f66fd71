"""Shared builders and fixtures."""

from __future__ import annotations

import itertools
import os
from pathlib import Path

import numpy as np
import pytest

from gpgl import Graph

# Real benchmark datasets are looked up under this directory (override
# with the GPGL_DATA_DIR environment variable); tests that need them
# skip with a pointer when the files are absent.
DATA_DIR = Path(os.environ.get("GPGL_DATA_DIR", Path(__file__).resolve().parents[1] / "data"))


def dataset_dir(name: str) -> Path:
    return DATA_DIR / name


def require_dataset(name: str) -> Path:
    d = dataset_dir(name)
    if not (d / f"{name}_A.txt").is_file():
        pytest.skip(
            f"{name} not present; place the TU-format files under {d} "
            "(or set GPGL_DATA_DIR)"
        )
    return d


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, list(itertools.combinations(range(n), 2)))


def star_graph(n_leaves: int) -> Graph:
    return Graph.from_edges(n_leaves + 1, [(0, i) for i in range(1, n_leaves + 1)])


def random_connected_graph(n: int, rng: np.random.Generator) -> Graph:
    """Random spanning tree plus a few extra edges."""
    edges = []
    order = rng.permutation(n)
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.append((int(order[i]), int(order[j])))
    extra = int(rng.integers(0, n))
    for _ in range(extra):
        u, v = rng.integers(0, n, size=2)
        if u != v:
            edges.append((int(u), int(v)))
    return Graph.from_edges(n, edges)


def write_tu_dataset(
    directory: Path,
    name: str,
    graphs: list[Graph],
    labels: list[int],
    node_labels: list[list[int]] | None = None,
    both_directions: bool = True,
) -> Path:
    """Write graphs in the four-file benchmark text format."""
    d = directory / name
    d.mkdir(parents=True, exist_ok=True)
    edge_lines = []
    indicator_lines = []
    offset = 0
    for gi, g in enumerate(graphs):
        for u, v in sorted(g.edges):
            a, b = u + 1 + offset, v + 1 + offset
            edge_lines.append(f"{a}, {b}")
            if both_directions:
                edge_lines.append(f"{b}, {a}")
        indicator_lines.extend([str(gi + 1)] * g.num_vertices)
        offset += g.num_vertices
    (d / f"{name}_A.txt").write_text("\n".join(edge_lines) + "\n")
    (d / f"{name}_graph_indicator.txt").write_text("\n".join(indicator_lines) + "\n")
    (d / f"{name}_graph_labels.txt").write_text(
        "\n".join(str(c) for c in labels) + "\n"
    )
    if node_labels is not None:
        flat = [str(v) for per_graph in node_labels for v in per_graph]
        (d / f"{name}_node_labels.txt").write_text("\n".join(flat) + "\n")
    return d


@pytest.fixture
def synth_dataset_dir(tmp_path: Path) -> Path:
    """A small labelled corpus: cycles (label 1) vs paths (label -1)."""
    rng = np.random.default_rng(7)
    graphs = []
    labels = []
    node_labels = []
    for gi in range(12):
        n = int(rng.integers(5, 10))
        if gi % 2 == 0:
            graphs.append(cycle_graph(n))
            labels.append(1)
        else:
            graphs.append(path_graph(n))
            labels.append(-1)
        node_labels.append([int(x) for x in rng.integers(0, 3, size=n)])
    return write_tu_dataset(tmp_path, "SYNTH", graphs, labels, node_labels)
