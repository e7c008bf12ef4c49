"""Graph data model, TUDataset ingestion, synthetic generation and per-graph statistics."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, replace

import numpy as np

logger = logging.getLogger(__name__)


class DatasetLoadError(Exception):
    """A mandatory dataset file is missing or unreadable."""


class DatasetFormatError(Exception):
    """A dataset file has inconsistent contents."""


class EmptyDatasetError(Exception):
    """An operation produced or received a dataset with no graphs."""


@dataclass(frozen=True)
class Graph:
    """One undirected simple graph.

    Edges are stored once each as (u, v) with u < v; node indices are local
    to the graph, in [0, num_nodes).
    """

    id: int
    num_nodes: int
    edges: tuple[tuple[int, int], ...]
    node_features: np.ndarray | None = None
    node_labels: tuple[int, ...] | None = None

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"graph {self.id}: self-loop at node {u}")
            if not (0 <= u < v < self.num_nodes):
                raise ValueError(f"graph {self.id}: edge ({u},{v}) out of range or unordered")
            if (u, v) in seen:
                raise ValueError(f"graph {self.id}: duplicate edge ({u},{v})")
            seen.add((u, v))
        if self.node_features is not None and self.node_features.shape[0] != self.num_nodes:
            raise ValueError(
                f"graph {self.id}: feature rows {self.node_features.shape[0]} != num_nodes {self.num_nodes}"
            )
        if self.node_labels is not None and len(self.node_labels) != self.num_nodes:
            raise ValueError(f"graph {self.id}: label count != num_nodes")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.num_nodes, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def neighbor_sets(self) -> list[set[int]]:
        nbrs: list[set[int]] = [set() for _ in range(self.num_nodes)]
        for u, v in self.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return nbrs


@dataclass(frozen=True)
class GraphSet:
    """Ordered collection of graphs; order is index-aligned with downstream
    cluster assignments and per-position replacements."""

    graphs: tuple[Graph, ...]
    provenance: str = "real"  # "real" or "perturbed"
    kind: str | None = None
    severity: float | None = None

    def __len__(self) -> int:
        return len(self.graphs)

    def __getitem__(self, i: int) -> Graph:
        return self.graphs[i]

    def __iter__(self):
        return iter(self.graphs)

    def with_graphs(self, graphs, kind: str | None = None, severity: float | None = None) -> "GraphSet":
        if kind is None:
            return replace(self, graphs=tuple(graphs))
        return GraphSet(tuple(graphs), provenance="perturbed", kind=kind, severity=severity)


@dataclass(frozen=True)
class DatasetStats:
    num_graphs: int
    mean_nodes: float
    min_nodes: int
    max_nodes: int
    mean_edges: float
    min_edges: int
    max_edges: int


def dataset_stats(gset: GraphSet) -> DatasetStats:
    if len(gset) == 0:
        raise EmptyDatasetError("cannot compute statistics of an empty graph set")
    nodes = [g.num_nodes for g in gset]
    edges = [g.num_edges for g in gset]
    return DatasetStats(
        num_graphs=len(gset),
        mean_nodes=float(np.mean(nodes)),
        min_nodes=int(min(nodes)),
        max_nodes=int(max(nodes)),
        mean_edges=float(np.mean(edges)),
        min_edges=int(min(edges)),
        max_edges=int(max(edges)),
    )


def _read_int_lines(path: str, what: str) -> list[int]:
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(int(float(line)))
            except ValueError as exc:
                raise DatasetFormatError(f"{what}, line {lineno}: not an integer: {line!r}") from exc
    return values


def load_tud_dataset(directory: str, name: str) -> GraphSet:
    """Load a flat-file TUDataset-format dataset.

    `<name>_A.txt` lists each undirected edge in both directions with
    1-indexed global node ids; they are deduplicated to single undirected
    edges. Self-loops and repeated pairs are dropped with a logged count.
    """
    a_path = os.path.join(directory, f"{name}_A.txt")
    ind_path = os.path.join(directory, f"{name}_graph_indicator.txt")
    for path in (a_path, ind_path):
        if not os.path.isfile(path):
            raise DatasetLoadError(f"missing mandatory dataset file: {path}")

    indicator = _read_int_lines(ind_path, ind_path)
    if not indicator:
        raise EmptyDatasetError(f"{ind_path} is empty")

    # Global node id -> (graph id, local node index); graph ids keep file order.
    graph_ids: list[int] = []
    graph_pos: dict[int, int] = {}
    local_index: list[tuple[int, int]] = []
    counts: dict[int, int] = {}
    for gid in indicator:
        if gid not in graph_pos:
            graph_pos[gid] = len(graph_ids)
            graph_ids.append(gid)
            counts[gid] = 0
        local_index.append((gid, counts[gid]))
        counts[gid] += 1

    edge_sets: list[set[tuple[int, int]]] = [set() for _ in graph_ids]
    dropped_self = dropped_dup = 0
    num_nodes_total = len(indicator)
    with open(a_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise DatasetFormatError(f"{a_path}, line {lineno}: expected two node ids")
            a, b = int(parts[0]), int(parts[1])
            if not (1 <= a <= num_nodes_total and 1 <= b <= num_nodes_total):
                raise DatasetFormatError(f"{a_path}, line {lineno}: node id out of range")
            (ga, ia), (gb, ib) = local_index[a - 1], local_index[b - 1]
            if ga != gb:
                raise DatasetFormatError(
                    f"{a_path}, line {lineno}: edge spans graphs {ga} and {gb}"
                )
            if ia == ib:
                dropped_self += 1
                continue
            edge = (min(ia, ib), max(ia, ib))
            pos = graph_pos[ga]
            if edge in edge_sets[pos]:
                dropped_dup += 1
            else:
                edge_sets[pos].add(edge)

    labels: list[int] | None = None
    label_path = os.path.join(directory, f"{name}_node_labels.txt")
    if os.path.isfile(label_path):
        labels = _read_int_lines(label_path, label_path)
        if len(labels) != num_nodes_total:
            raise DatasetFormatError(
                f"{label_path}: {len(labels)} labels for {num_nodes_total} nodes"
            )

    if dropped_self or dropped_dup:
        # Duplicate count includes the expected second direction of each edge.
        logger.info(
            "%s: dropped %d self-loops, %d repeated pairs", name, dropped_self, dropped_dup
        )

    graphs = []
    for pos, gid in enumerate(graph_ids):
        n = counts[gid]
        node_labels = None
        if labels is not None:
            node_labels = tuple(
                labels[i] for i, (g, _) in enumerate(local_index) if g == gid
            )
        graphs.append(
            Graph(
                id=pos,
                num_nodes=n,
                edges=tuple(sorted(edge_sets[pos])),
                node_labels=node_labels,
            )
        )
    return GraphSet(tuple(graphs))


def save_tud_dataset(gset: GraphSet, directory: str, name: str) -> None:
    """Write `<name>_A.txt` and `<name>_graph_indicator.txt` (both edge directions)."""
    os.makedirs(directory, exist_ok=True)
    offset = 0
    a_lines = []
    ind_lines = []
    for gid, g in enumerate(gset, start=1):
        for u, v in g.edges:
            a_lines.append(f"{offset + u + 1}, {offset + v + 1}")
            a_lines.append(f"{offset + v + 1}, {offset + u + 1}")
        ind_lines.extend([str(gid)] * g.num_nodes)
        offset += g.num_nodes
    with open(os.path.join(directory, f"{name}_A.txt"), "w") as fh:
        fh.write("\n".join(a_lines) + ("\n" if a_lines else ""))
    with open(os.path.join(directory, f"{name}_graph_indicator.txt"), "w") as fh:
        fh.write("\n".join(ind_lines) + ("\n" if ind_lines else ""))


def filter_by_size(gset: GraphSet, min_nodes: int, max_nodes: int) -> GraphSet:
    if min_nodes < 1:
        raise ValueError("min_nodes must be >= 1")
    kept = [g for g in gset if min_nodes <= g.num_nodes <= max_nodes]
    if not kept:
        raise EmptyDatasetError(
            f"no graphs with {min_nodes} <= num_nodes <= {max_nodes}"
        )
    return gset.with_graphs(kept)


def sample_subset(gset: GraphSet, n: int, rng_seed: int) -> GraphSet:
    if not (1 <= n <= len(gset)):
        raise ValueError(f"sample size {n} outside [1, {len(gset)}]")
    rng = np.random.default_rng(rng_seed)
    idx = np.sort(rng.choice(len(gset), size=n, replace=False))
    return gset.with_graphs([gset[int(i)] for i in idx])


def erdos_renyi(num_nodes: int, edge_prob: float, rng_seed: int, graph_id: int = 0) -> Graph:
    """G(n, p): each of the C(n, 2) pairs is an edge independently with probability p."""
    if num_nodes < 1:
        raise ValueError("num_nodes must be >= 1")
    if not (0.0 <= edge_prob <= 1.0):
        raise ValueError(f"edge_prob {edge_prob} outside [0, 1]")
    rng = np.random.default_rng(rng_seed)
    iu, iv = np.triu_indices(num_nodes, k=1)
    mask = rng.random(len(iu)) < edge_prob
    edges = tuple((int(u), int(v)) for u, v in zip(iu[mask], iv[mask]))
    return Graph(id=graph_id, num_nodes=num_nodes, edges=edges)


def clustering_coefficients(g: Graph) -> np.ndarray:
    """Local clustering coefficient per node; degree < 2 gives 0."""
    nbrs = g.neighbor_sets()
    cc = np.zeros(g.num_nodes)
    for i, ni in enumerate(nbrs):
        d = len(ni)
        if d < 2:
            continue
        links = sum(len(ni & nbrs[j]) for j in ni) // 2
        cc[i] = links / (d * (d - 1) / 2)
    return cc


def graph_descriptor(g: Graph, degree_bins: int = 64, cc_bins: int = 10) -> np.ndarray:
    """Normalized degree histogram (last bin = overflow) concatenated with a
    normalized clustering-coefficient histogram over [0, 1]."""
    if degree_bins < 2:
        raise ValueError("degree_bins must be >= 2")
    if cc_bins < 1:
        raise ValueError("cc_bins must be >= 1")
    deg = np.minimum(g.degrees(), degree_bins - 1)
    dh = np.bincount(deg, minlength=degree_bins).astype(float)
    dh /= dh.sum()
    cc = clustering_coefficients(g)
    ch, _ = np.histogram(cc, bins=np.linspace(0.0, 1.0, cc_bins + 1))
    ch = ch.astype(float)
    ch /= ch.sum()
    return np.concatenate([dh, ch])
