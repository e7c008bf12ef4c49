"""Controlled degradations of a real graph set: mixing, rewiring, mode collapse
and mode dropping, each parameterized by a severity in [0, 1]."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .graphs import Graph, GraphSet, erdos_renyi, graph_descriptor

KINDS = ("mixing", "rewiring", "mode-collapse", "mode-dropping")


@dataclass(frozen=True)
class ClusterAssignment:
    num_clusters: int
    labels: tuple[int, ...]
    medoid_index: tuple[int, ...]

    def members(self, c: int) -> list[int]:
        return [i for i, lbl in enumerate(self.labels) if lbl == c]


def sweep_levels(step: float) -> list[float]:
    """[0, step, 2*step, ..., 1]; the final level is exactly 1."""
    if not (0.0 < step <= 1.0):
        raise ValueError("step must be in (0, 1]")
    levels = [round(i * step, 12) for i in range(int(np.floor(1.0 / step + 1e-9)) + 1)]
    if levels[-1] < 1.0:
        levels.append(1.0)
    levels[-1] = 1.0
    return levels


def _require_real(gset: GraphSet) -> None:
    if gset.provenance != "real":
        raise ValueError("perturbations apply to a real graph set only")


def mix_random(
    gset: GraphSet, t: float, rng_seed: int, edge_prob: float | None = None
) -> GraphSet:
    """Replace round(t*N) graphs with Erdős–Rényi graphs of the same node
    count. Edge probability defaults to each original graph's edge proportion;
    a fixed override models a generator with a mismatched density."""
    _require_real(gset)
    if not (0.0 <= t <= 1.0):
        raise ValueError("severity t must be in [0, 1]")
    rng = np.random.default_rng(rng_seed)
    n_replace = int(round(t * len(gset)))
    replaced = set(rng.choice(len(gset), size=n_replace, replace=False).tolist())
    out = []
    for i, g in enumerate(gset):
        if i not in replaced:
            out.append(g)
            continue
        pairs = g.num_nodes * (g.num_nodes - 1) // 2
        if edge_prob is not None:
            p = edge_prob
        else:
            p = g.num_edges / pairs if pairs > 0 else 0.0
        out.append(
            erdos_renyi(g.num_nodes, p, int(rng.integers(0, 2**63)), graph_id=g.id)
        )
    return gset.with_graphs(out, kind="mixing", severity=t)


def _rewire_graph(g: Graph, t: float, rng: np.random.Generator) -> Graph:
    edge_set = set(g.edges)
    for edge in g.edges:
        if rng.random() >= t:
            continue
        u, v = edge
        detach, keep = (u, v) if rng.random() < 0.5 else (v, u)
        edge_set.discard(edge)
        candidates = [
            w
            for w in range(g.num_nodes)
            if w != keep and (min(keep, w), max(keep, w)) not in edge_set
        ]
        if not candidates:
            edge_set.add(edge)  # complete neighborhood: leave the edge alone
            continue
        w = int(candidates[rng.integers(0, len(candidates))])
        edge_set.add((min(keep, w), max(keep, w)))
    return replace(g, edges=tuple(sorted(edge_set)))


def rewire_edges(gset: GraphSet, t: float, rng_seed: int) -> GraphSet:
    """Independently rewire each edge with probability t: detach from one
    endpoint picked at random and reattach to another node, never creating a
    self-loop or duplicate edge; per-graph edge counts are preserved."""
    _require_real(gset)
    if not (0.0 <= t <= 1.0):
        raise ValueError("severity t must be in [0, 1]")
    rng = np.random.default_rng(rng_seed)
    out = [_rewire_graph(g, t, rng) for g in gset]
    return gset.with_graphs(out, kind="rewiring", severity=t)


def cluster_graphs(
    gset: GraphSet, k: int, rng_seed: int, max_iter: int = 100
) -> ClusterAssignment:
    """k-medoids over Euclidean distances between graph descriptors.

    Medoids are real member graphs, which keeps "cluster center" well defined
    when a cluster is replaced by its center.
    """
    n = len(gset)
    if not (1 <= k <= n):
        raise ValueError(f"k={k} outside [1, {n}]")
    desc = np.stack([graph_descriptor(g) for g in gset])
    dist = np.linalg.norm(desc[:, None, :] - desc[None, :, :], axis=2)
    rng = np.random.default_rng(rng_seed)
    medoids = np.sort(rng.choice(n, size=k, replace=False))
    labels = np.full(n, -1, dtype=np.int64)
    for _ in range(max_iter):
        new_labels = np.argmin(dist[:, medoids], axis=1)
        # A medoid always belongs to its own cluster, even under distance ties.
        for c, m in enumerate(medoids):
            new_labels[m] = c
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            members = np.where(labels == c)[0]
            within = dist[np.ix_(members, members)].sum(axis=1)
            medoids[c] = members[int(np.argmin(within))]
    return ClusterAssignment(
        num_clusters=k,
        labels=tuple(int(x) for x in labels),
        medoid_index=tuple(int(m) for m in medoids),
    )


def mode_collapse(
    gset: GraphSet, clusters: ClusterAssignment, n_collapsed: int, rng_seed: int
) -> GraphSet:
    """Replace every member of n_collapsed randomly chosen clusters by a copy
    of that cluster's medoid graph."""
    if not (0 <= n_collapsed <= clusters.num_clusters):
        raise ValueError("n_collapsed outside [0, num_clusters]")
    rng = np.random.default_rng(rng_seed)
    chosen = set(
        rng.choice(clusters.num_clusters, size=n_collapsed, replace=False).tolist()
    )
    out = []
    for i, g in enumerate(gset):
        c = clusters.labels[i]
        if c in chosen:
            medoid = gset[clusters.medoid_index[c]]
            out.append(replace(medoid, id=g.id))
        else:
            out.append(g)
    t = n_collapsed / clusters.num_clusters
    return gset.with_graphs(out, kind="mode-collapse", severity=t)


def mode_drop(
    gset: GraphSet, clusters: ClusterAssignment, n_dropped: int, rng_seed: int
) -> GraphSet:
    """Replace members of n_dropped randomly chosen clusters by graphs sampled
    with replacement from the surviving clusters."""
    if not (0 <= n_dropped <= clusters.num_clusters - 1):
        raise ValueError("n_dropped must leave at least one cluster")
    rng = np.random.default_rng(rng_seed)
    dropped = set(
        rng.choice(clusters.num_clusters, size=n_dropped, replace=False).tolist()
    )
    survivors = [
        i for i, lbl in enumerate(clusters.labels) if lbl not in dropped
    ]
    out = []
    for i, g in enumerate(gset):
        if clusters.labels[i] in dropped:
            src = gset[survivors[int(rng.integers(0, len(survivors)))]]
            out.append(replace(src, id=g.id))
        else:
            out.append(g)
    t = n_dropped / clusters.num_clusters
    return gset.with_graphs(out, kind="mode-dropping", severity=t)
