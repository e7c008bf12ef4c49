"""Graph-set embedders with a scikit-learn transformer API.

Three extractors: deterministic structural statistics, a random-weight
message-passing network, and a trained graph masked autoencoder. All of them
are fit on the real set and then transform any graph set into an N x d
embedding matrix, row-aligned with the input order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .graphs import Graph, GraphSet, graph_descriptor
from .nnops import (
    MessagePassingLayer,
    ParamStore,
    adam_step,
    bce_logit_loss,
    mean_pool,
    sce_loss,
)


@dataclass(frozen=True)
class DegreeOneHot:
    """One-hot of min(degree, cap); the featureless fallback."""

    cap: int = 63

    @property
    def dim(self) -> int:
        return self.cap + 1


@dataclass(frozen=True)
class NodeLabelOneHot:
    num_classes: int

    @property
    def dim(self) -> int:
        return self.num_classes


@dataclass(frozen=True)
class EmbeddingSet:
    matrix: np.ndarray
    extractor: str
    fingerprint: str


def _one_hot_features(g: Graph, spec, strict: bool = True) -> np.ndarray:
    feats = np.zeros((g.num_nodes, spec.dim))
    if isinstance(spec, DegreeOneHot):
        idx = np.minimum(g.degrees(), spec.cap)
    elif isinstance(spec, NodeLabelOneHot):
        if g.node_labels is None:
            if strict:
                raise ValueError(f"graph {g.id} has no node labels")
            return feats  # synthetic replacement graph: all-zero feature rows
        idx = np.asarray(g.node_labels, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= spec.num_classes):
            raise ValueError(f"graph {g.id}: node label outside [0, {spec.num_classes})")
    else:
        raise TypeError(f"unknown feature spec {spec!r}")
    feats[np.arange(g.num_nodes), idx] = 1.0
    return feats


def attach_features(gset: GraphSet, spec) -> GraphSet:
    """Populate node_features on every graph with a uniform one-hot encoding."""
    out = [replace(g, node_features=_one_hot_features(g, spec)) for g in gset]
    return gset.with_graphs(out)


def default_feature_spec(gset: GraphSet) -> DegreeOneHot | NodeLabelOneHot:
    """Node-label one-hots when labels exist on every graph, else degree one-hots."""
    if all(g.node_labels is not None for g in gset):
        num_classes = max(max(g.node_labels) for g in gset) + 1
        return NodeLabelOneHot(num_classes=num_classes)
    return DegreeOneHot()


def _require_features(gset: GraphSet) -> int:
    dims = {g.node_features.shape[1] if g.node_features is not None else None for g in gset}
    if None in dims or len(dims) != 1:
        raise ValueError("all graphs need node features of one common dimension")
    return dims.pop()


class StatisticsExtractor(BaseEstimator, TransformerMixin):
    """Deterministic reference extractor: per-graph structural descriptor."""

    def __init__(self, degree_bins: int = 64, cc_bins: int = 10):
        self.degree_bins = degree_bins
        self.cc_bins = cc_bins

    def fit(self, gset: GraphSet, y=None):
        self.n_features_out_ = self.degree_bins + self.cc_bins
        return self

    def transform(self, gset: GraphSet) -> np.ndarray:
        return np.stack(
            [graph_descriptor(g, self.degree_bins, self.cc_bins) for g in gset]
        )


class _EncoderMixin:
    """Shared forward pass: stacked message passing, layer-wise mean-pool readout.

    A `feature_spec` (DegreeOneHot or NodeLabelOneHot) lets the extractor
    featurize perturbed sets on the fly; without one, every graph must carry
    pre-attached features of the fitted dimension. Under NodeLabelOneHot,
    replacement graphs that lack labels get all-zero feature rows.
    """

    def _resolve_features(self, gset: GraphSet) -> int:
        if self.feature_spec is not None:
            return self.feature_spec.dim
        return _require_features(gset)

    def _features(self, g: Graph) -> np.ndarray:
        if self.feature_spec is None:
            if g.node_features is None:
                raise ValueError(f"graph {g.id} has no node features attached")
            return g.node_features
        if (
            g.node_features is not None
            and g.node_features.shape[1] == self.feature_spec.dim
        ):
            return g.node_features
        return _one_hot_features(g, self.feature_spec, strict=False)

    def _encode_layers(self, g: Graph) -> list[np.ndarray]:
        H = self._features(g)
        outputs = []
        for layer in self.layers_:
            H, _ = layer.forward(g.edges, H)
            outputs.append(H)
        return outputs

    def _embed(self, g: Graph) -> np.ndarray:
        return np.concatenate([mean_pool(H) for H in self._encode_layers(g)])

    def transform(self, gset: GraphSet) -> np.ndarray:
        if not hasattr(self, "layers_"):
            raise RuntimeError("extractor is not fitted")
        d = self._resolve_features(gset)
        if d != self.n_features_in_:
            raise ValueError(
                f"feature dimension {d} does not match fitted dimension {self.n_features_in_}"
            )
        return np.stack([self._embed(g) for g in gset])


class RandomGNNExtractor(_EncoderMixin, BaseEstimator, TransformerMixin):
    """Untrained message-passing network with seeded random weights."""

    def __init__(
        self,
        hidden_dim: int = 32,
        num_layers: int = 2,
        seed: int = 0,
        feature_spec=None,
    ):
        self.hidden_dim = hidden_dim
        self.num_layers = num_layers
        self.seed = seed
        self.feature_spec = feature_spec

    def fit(self, gset: GraphSet, y=None):
        self.n_features_in_ = self._resolve_features(gset)
        rng = np.random.default_rng(self.seed)
        self.store_ = ParamStore()
        self.layers_ = []
        d_in = self.n_features_in_
        for i in range(self.num_layers):
            self.layers_.append(
                MessagePassingLayer(
                    self.store_, f"enc{i}", d_in, self.hidden_dim, "relu", rng
                )
            )
            d_in = self.hidden_dim
        return self


class GraphMAEExtractor(_EncoderMixin, BaseEstimator, TransformerMixin):
    """Masked autoencoder over graphs.

    Each training step masks either node features (recovered with a scaled
    cosine error through a one-layer decoder) or edges (recovered by scoring
    held-out edges against sampled non-edges with inner products of endpoint
    embeddings), with equal probability per graph per epoch.
    """

    def __init__(
        self,
        hidden_dim: int = 32,
        num_layers: int = 2,
        mask_rate: float = 0.2,
        epochs: int = 30,
        learning_rate: float = 1e-3,
        sce_gamma: float = 2.0,
        seed: int = 0,
        feature_spec=None,
    ):
        self.hidden_dim = hidden_dim
        self.num_layers = num_layers
        self.mask_rate = mask_rate
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.sce_gamma = sce_gamma
        self.seed = seed
        self.feature_spec = feature_spec

    def _build(self, d_in: int) -> None:
        if not (0.0 < self.mask_rate < 1.0):
            raise ValueError("mask_rate must be in (0, 1)")
        if self.num_layers < 1:
            raise ValueError("num_layers must be >= 1")
        rng = np.random.default_rng(self.seed)
        self.n_features_in_ = d_in
        self.store_ = ParamStore()
        self.layers_ = []
        d = d_in
        for i in range(self.num_layers):
            self.layers_.append(
                MessagePassingLayer(self.store_, f"enc{i}", d, self.hidden_dim, "relu", rng)
            )
            d = self.hidden_dim
        self.decoder_ = MessagePassingLayer(
            self.store_, "dec", self.hidden_dim, d_in, "identity", rng
        )
        self.store_.add("mask_token", np.zeros(d_in))

    def _encode_with_cache(self, edges, H):
        caches = []
        for layer in self.layers_:
            H, cache = layer.forward(edges, H)
            caches.append(cache)
        return H, caches

    def _backprop_encoder(self, caches, grad_top: np.ndarray) -> np.ndarray:
        grad = grad_top
        for layer, cache in zip(reversed(self.layers_), reversed(caches)):
            grad = layer.backward(cache, grad)
        return grad

    def _node_step(self, g: Graph, rng: np.random.Generator) -> float:
        X = self._features(g)
        n = g.num_nodes
        n_mask = max(1, int(round(self.mask_rate * n)))
        masked = rng.choice(n, size=n_mask, replace=False)
        H0 = X.copy()
        H0[masked] = self.store_.params["mask_token"]
        top, caches = self._encode_with_cache(g.edges, H0)
        pred, dec_cache = self.decoder_.forward(g.edges, top)
        loss, g_rows = sce_loss(pred[masked], X[masked], self.sce_gamma)
        g_pred = np.zeros_like(pred)
        g_pred[masked] = g_rows
        g_top = self.decoder_.backward(dec_cache, g_pred)
        g_input = self._backprop_encoder(caches, g_top)
        self.store_.grads["mask_token"][...] += g_input[masked].sum(axis=0)
        return loss

    def _sample_non_edges(self, g: Graph, count: int, rng: np.random.Generator):
        present = set(g.edges)
        non_edges = []
        attempts = 0
        while len(non_edges) < count and attempts < 30 * count:
            u = int(rng.integers(0, g.num_nodes))
            v = int(rng.integers(0, g.num_nodes))
            attempts += 1
            if u == v:
                continue
            pair = (min(u, v), max(u, v))
            if pair in present:
                continue
            non_edges.append(pair)
        if len(non_edges) < count:
            # Near-complete graph: fall back to exhaustive enumeration.
            pool = [
                (u, v)
                for u in range(g.num_nodes)
                for v in range(u + 1, g.num_nodes)
                if (u, v) not in present
            ]
            need = count - len(non_edges)
            if pool:
                idx = rng.choice(len(pool), size=min(need, len(pool)), replace=True)
                non_edges.extend(pool[int(i)] for i in idx)
        return non_edges

    def _edge_step(self, g: Graph, rng: np.random.Generator) -> float:
        m = g.num_edges
        n_mask = max(1, int(round(self.mask_rate * m)))
        masked_idx = rng.choice(m, size=n_mask, replace=False)
        masked = [g.edges[int(i)] for i in masked_idx]
        visible = tuple(e for i, e in enumerate(g.edges) if i not in set(masked_idx.tolist()))
        top, caches = self._encode_with_cache(visible, self._features(g))
        negatives = self._sample_non_edges(g, n_mask, rng)
        pairs = masked + negatives
        labels = np.concatenate([np.ones(len(masked)), np.zeros(len(negatives))])
        scores = np.array([float(top[u] @ top[v]) for u, v in pairs])
        loss, g_scores = bce_logit_loss(scores, labels)
        g_top = np.zeros_like(top)
        for (u, v), gs in zip(pairs, g_scores):
            g_top[u] += gs * top[v]
            g_top[v] += gs * top[u]
        self._backprop_encoder(caches, g_top)
        return loss

    def fit(self, gset: GraphSet, y=None):
        d_in = self._resolve_features(gset)
        self._build(d_in)
        rng = np.random.default_rng(self.seed)
        self.epoch_losses_ = []
        n = len(gset)
        for _ in range(self.epochs):
            order = rng.permutation(n)
            losses = []
            for i in order:
                g = gset[int(i)]
                node_branch = g.num_edges == 0 or rng.random() < 0.5
                loss = self._node_step(g, rng) if node_branch else self._edge_step(g, rng)
                adam_step(self.store_, self.learning_rate)
                losses.append(loss)
            self.epoch_losses_.append(float(np.mean(losses)))
        return self

    def save_params(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.store_.to_json())

    def load_params(self, path: str, d_in: int) -> "GraphMAEExtractor":
        """Rebuild layers for feature dimension d_in and load trained weights."""
        self._build(d_in)
        with open(path) as fh:
            loaded = ParamStore.from_json(fh.read())
        for name, p in self.store_.params.items():
            if name not in loaded.params or loaded.params[name].shape != p.shape:
                raise ValueError(f"parameter document does not match config: {name}")
            p[...] = loaded.params[name]
        return self


EXTRACTORS = {
    "stats": StatisticsExtractor,
    "random-gnn": RandomGNNExtractor,
    "gmae": GraphMAEExtractor,
}


def make_extractor(name: str, **params):
    if name not in EXTRACTORS:
        raise ValueError(f"unknown extractor {name!r}; choose from {sorted(EXTRACTORS)}")
    return EXTRACTORS[name](**params)
