"""Benchmark dataset loading, featurisation and export.

Reads the plain-text benchmark format in which a dataset directory
``DS/`` holds ``DS_A.txt`` (one ``u, v`` edge per line, vertices numbered
1..N over the whole corpus), ``DS_graph_indicator.txt`` (graph id per
vertex), ``DS_graph_labels.txt`` (class per graph) and optionally
``DS_node_labels.txt`` / ``DS_node_attributes.txt``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .augment import AugmentedSet
from .errors import DatasetParseError, MissingNodeLabelsError, WindowOverflowError
from .graph import Graph
from .grid import DEFAULT_WINDOW, VertexLossReport, build_grid_tensor
from .tensor_io import ManifestEntry, manifest_path_for, write_container, write_manifest

__all__ = [
    "GraphDataset",
    "DatasetStats",
    "load_tudataset",
    "featurize",
    "dataset_stats",
    "export_tensors",
    "DEGREE_CAP",
]

# One-hot degree features are clipped to this many bins; degrees at or
# beyond the cap share the top bin.
DEGREE_CAP = 256


@dataclass(frozen=True, eq=False)
class GraphDataset:
    """A labelled graph corpus.

    ``labels`` are remapped to contiguous ``0..class_count-1`` in sorted
    order of the raw label values. ``node_labels`` holds the raw per-vertex
    integer labels when the source provides them; ``node_attributes`` is a
    pass-through of continuous per-vertex vectors, unused downstream.
    """

    name: str
    graphs: tuple[Graph, ...]
    labels: np.ndarray
    class_count: int
    node_labels: tuple[np.ndarray, ...] | None = None
    node_attributes: tuple[np.ndarray, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.graphs) == 0:
            raise ValueError("dataset must contain at least one graph")
        if self.labels.shape != (len(self.graphs),):
            raise ValueError("labels must have one entry per graph")
        if self.class_count < 1:
            raise ValueError("class_count must be >= 1")
        if self.labels.min() < 0 or self.labels.max() >= self.class_count:
            raise ValueError("labels must lie in [0, class_count)")
        for field in (self.node_labels, self.node_attributes):
            if field is not None:
                if len(field) != len(self.graphs):
                    raise ValueError("per-vertex data must have one entry per graph")
                for g, arr in zip(self.graphs, field):
                    if arr.shape[0] != g.num_vertices:
                        raise ValueError("per-vertex data must match graph sizes")

    def __len__(self) -> int:
        return len(self.graphs)


@dataclass(frozen=True)
class DatasetStats:
    """Corpus summary statistics.

    ``avg_degree`` is average edges per vertex (mean edge count over mean
    vertex count). ``max_degree`` counts both orientations of each
    undirected edge, i.e. twice the largest vertex degree; that is the
    convention of the published benchmark tables this output is compared
    against. ``feature_dim`` is the width ``featurize`` with mode "auto"
    would produce.
    """

    name: str
    num_graphs: int
    num_classes: int
    avg_nodes: float
    avg_edges: float
    avg_degree: float
    max_degree: int
    feature_dim: int

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "num_graphs": self.num_graphs,
            "num_classes": self.num_classes,
            "avg_nodes": self.avg_nodes,
            "avg_edges": self.avg_edges,
            "avg_degree": self.avg_degree,
            "max_degree": self.max_degree,
            "feature_dim": self.feature_dim,
        }


def _read_lines(path: Path) -> list[str]:
    return path.read_text().splitlines()


def _parse_int(text: str, path: Path, line_no: int) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise DatasetParseError(
            f"expected an integer, got {text.strip()!r}",
            path=str(path),
            line=line_no,
        ) from None


def _find_prefix(directory: Path) -> str:
    matches = sorted(directory.glob("*_A.txt"))
    if not matches:
        raise DatasetParseError(
            "no *_A.txt adjacency file found", path=str(directory)
        )
    if len(matches) > 1:
        named = directory / f"{directory.name}_A.txt"
        if named in matches:
            return directory.name
        raise DatasetParseError(
            f"ambiguous dataset prefix: {[m.name for m in matches]}",
            path=str(directory),
        )
    return matches[0].name[: -len("_A.txt")]


def load_tudataset(directory: str | Path) -> GraphDataset:
    """Load a dataset directory in the four-file benchmark text format.

    Vertex and graph numbering in the files is 1-based. Duplicate and
    reversed edge listings collapse to one undirected edge. Malformed
    lines raise DatasetParseError carrying the file and line number;
    vertex indices outside 1..N raise IndexError.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise DatasetParseError("not a directory", path=str(directory))
    prefix = _find_prefix(directory)

    indicator_path = directory / f"{prefix}_graph_indicator.txt"
    labels_path = directory / f"{prefix}_graph_labels.txt"
    edges_path = directory / f"{prefix}_A.txt"
    for required in (indicator_path, labels_path):
        if not required.is_file():
            raise DatasetParseError("missing required file", path=str(required))

    indicator = [
        _parse_int(text, indicator_path, i + 1)
        for i, text in enumerate(_read_lines(indicator_path))
    ]
    num_nodes = len(indicator)
    if num_nodes == 0:
        raise DatasetParseError("no vertices", path=str(indicator_path))
    num_graphs = max(indicator)
    for i, gid in enumerate(indicator):
        if not 1 <= gid <= num_graphs:
            raise DatasetParseError(
                f"graph indicator {gid} out of range",
                path=str(indicator_path),
                line=i + 1,
            )

    # Local vertex numbering: a vertex's index within its graph is its
    # rank among that graph's vertices in file order.
    local_index = np.zeros(num_nodes, dtype=np.int64)
    counts = [0] * (num_graphs + 1)
    for i, gid in enumerate(indicator):
        local_index[i] = counts[gid]
        counts[gid] += 1
    sizes = counts[1:]
    if min(sizes) == 0:
        empty = sizes.index(0) + 1
        raise DatasetParseError(
            f"graph {empty} has no vertices", path=str(indicator_path)
        )

    edge_lists: list[list[tuple[int, int]]] = [[] for _ in range(num_graphs)]
    for i, text in enumerate(_read_lines(edges_path)):
        if not text.strip():
            continue
        parts = text.split(",")
        if len(parts) != 2:
            raise DatasetParseError(
                f"expected 'u, v', got {text.strip()!r}",
                path=str(edges_path),
                line=i + 1,
            )
        u = _parse_int(parts[0], edges_path, i + 1)
        v = _parse_int(parts[1], edges_path, i + 1)
        for endpoint in (u, v):
            if not 1 <= endpoint <= num_nodes:
                raise IndexError(
                    f"{edges_path.name}:{i + 1}: vertex {endpoint} out of "
                    f"range 1..{num_nodes}"
                )
        gu, gv = indicator[u - 1], indicator[v - 1]
        if gu != gv:
            raise DatasetParseError(
                f"edge ({u}, {v}) crosses graphs {gu} and {gv}",
                path=str(edges_path),
                line=i + 1,
            )
        edge_lists[gu - 1].append((int(local_index[u - 1]), int(local_index[v - 1])))

    raw_labels = [
        _parse_int(text, labels_path, i + 1)
        for i, text in enumerate(_read_lines(labels_path))
    ]
    if len(raw_labels) != num_graphs:
        raise DatasetParseError(
            f"{len(raw_labels)} labels for {num_graphs} graphs",
            path=str(labels_path),
        )
    classes = sorted(set(raw_labels))
    class_of = {c: i for i, c in enumerate(classes)}
    labels = np.array([class_of[c] for c in raw_labels], dtype=np.int64)

    node_labels = None
    node_labels_path = directory / f"{prefix}_node_labels.txt"
    if node_labels_path.is_file():
        values = [
            _parse_int(text, node_labels_path, i + 1)
            for i, text in enumerate(_read_lines(node_labels_path))
        ]
        if len(values) != num_nodes:
            raise DatasetParseError(
                f"{len(values)} node labels for {num_nodes} vertices",
                path=str(node_labels_path),
            )
        per_graph: list[list[int]] = [[] for _ in range(num_graphs)]
        for value, gid in zip(values, indicator):
            per_graph[gid - 1].append(value)
        node_labels = tuple(np.array(vals, dtype=np.int64) for vals in per_graph)

    node_attributes = None
    attrs_path = directory / f"{prefix}_node_attributes.txt"
    if attrs_path.is_file():
        rows = []
        for i, text in enumerate(_read_lines(attrs_path)):
            try:
                rows.append([float(part) for part in text.split(",")])
            except ValueError:
                raise DatasetParseError(
                    f"expected comma-separated floats, got {text.strip()!r}",
                    path=str(attrs_path),
                    line=i + 1,
                ) from None
        if len(rows) != num_nodes:
            raise DatasetParseError(
                f"{len(rows)} attribute rows for {num_nodes} vertices",
                path=str(attrs_path),
            )
        per_graph_attrs: list[list[list[float]]] = [[] for _ in range(num_graphs)]
        for row, gid in zip(rows, indicator):
            per_graph_attrs[gid - 1].append(row)
        node_attributes = tuple(
            np.array(rows, dtype=np.float64) for rows in per_graph_attrs
        )

    graphs = tuple(
        Graph.from_edges(sizes[i], edge_lists[i]) for i in range(num_graphs)
    )
    return GraphDataset(
        name=prefix,
        graphs=graphs,
        labels=labels,
        class_count=len(classes),
        node_labels=node_labels,
        node_attributes=node_attributes,
    )


def _corpus_max_degree(ds: GraphDataset) -> int:
    return max(int(g.degrees().max()) if g.num_vertices else 0 for g in ds.graphs)


def featurize(
    ds: GraphDataset, mode: str = "auto", degree_cap: int = DEGREE_CAP
) -> GraphDataset:
    """Attach one-hot vertex features to every graph.

    Modes: "one_hot_label" encodes the vertex label over the corpus-wide
    sorted label vocabulary; "one_hot_degree" encodes vertex degree with
    at most ``degree_cap`` bins, larger degrees sharing the top bin;
    "auto" picks labels when the dataset has them, degrees otherwise.
    The feature width is fixed across the corpus so every graph maps to
    the same tensor depth.
    """
    if mode == "auto":
        mode = "one_hot_label" if ds.node_labels is not None else "one_hot_degree"
    if mode == "one_hot_label":
        if ds.node_labels is None:
            raise MissingNodeLabelsError(
                f"dataset {ds.name!r} has no vertex labels; "
                "use mode 'one_hot_degree'"
            )
        vocab = sorted({int(v) for arr in ds.node_labels for v in arr})
        column = {v: i for i, v in enumerate(vocab)}
        dim = len(vocab)
        graphs = []
        for g, arr in zip(ds.graphs, ds.node_labels):
            feats = np.zeros((g.num_vertices, dim), dtype=np.float64)
            for v, lab in enumerate(arr):
                feats[v, column[int(lab)]] = 1.0
            graphs.append(g.with_features(feats))
    elif mode == "one_hot_degree":
        if degree_cap < 1:
            raise ValueError(f"degree_cap must be >= 1, got {degree_cap}")
        dim = min(_corpus_max_degree(ds) + 1, degree_cap)
        graphs = []
        for g in ds.graphs:
            feats = np.zeros((g.num_vertices, dim), dtype=np.float64)
            for v, deg in enumerate(g.degrees()):
                feats[v, min(int(deg), dim - 1)] = 1.0
            graphs.append(g.with_features(feats))
    else:
        raise ValueError(
            f"mode must be 'one_hot_label', 'one_hot_degree' or 'auto', got {mode!r}"
        )
    return replace(ds, graphs=tuple(graphs))


def dataset_stats(ds: GraphDataset) -> DatasetStats:
    """Summarise a corpus; see DatasetStats for the conventions used."""
    sizes = np.array([g.num_vertices for g in ds.graphs], dtype=np.float64)
    edges = np.array([g.num_edges for g in ds.graphs], dtype=np.float64)
    avg_nodes = float(sizes.mean())
    avg_edges = float(edges.mean())
    if ds.graphs[0].features is not None:
        feature_dim = ds.graphs[0].features.shape[1]
    elif ds.node_labels is not None:
        feature_dim = len({int(v) for arr in ds.node_labels for v in arr})
    else:
        feature_dim = min(_corpus_max_degree(ds) + 1, DEGREE_CAP)
    return DatasetStats(
        name=ds.name,
        num_graphs=len(ds.graphs),
        num_classes=ds.class_count,
        avg_nodes=avg_nodes,
        avg_edges=avg_edges,
        avg_degree=avg_edges / avg_nodes,
        max_degree=2 * _corpus_max_degree(ds),
        feature_dim=feature_dim,
    )


def export_tensors(
    sets: list[AugmentedSet],
    ds: GraphDataset,
    path: str | Path,
    window: tuple[int, int] = DEFAULT_WINDOW,
    merge: str = "average",
) -> tuple[list[ManifestEntry], list[VertexLossReport]]:
    """Write the grid tensors of augmented layouts to a container.

    Failed layout runs are skipped, so the container count is the number
    of successful runs. The manifest sidecar is written next to the
    container. Returns the manifest entries plus the per-layout vertex
    loss reports.
    """
    runs = [
        (s.graph_id, lay) for s in sets for lay in s.successful()
    ]
    if not runs:
        raise ValueError("nothing to export: no successful layouts")
    tensors = []
    entries = []
    reports = []
    for graph_id, lay in runs:
        g = ds.graphs[graph_id]
        if g.features is None:
            raise ValueError(
                f"graph {graph_id} has no features; run featurize first"
            )
        try:
            tensor, report = build_grid_tensor(
                lay.grid, g.features, window=window, merge=merge
            )
        except WindowOverflowError as exc:
            raise WindowOverflowError(str(exc), graph_id=graph_id) from None
        tensors.append(tensor.data)
        reports.append(report)
        entries.append(
            ManifestEntry(
                graph_id=graph_id,
                layout_seed=lay.seed,
                label=int(ds.labels[graph_id]),
            )
        )
    write_container(path, np.stack(tensors))
    write_manifest(manifest_path_for(path), entries)
    return entries, reports
