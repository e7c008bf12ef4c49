import numpy as np
import pytest

from ggeval.extractors import (
    DegreeOneHot,
    GraphMAEExtractor,
    NodeLabelOneHot,
    RandomGNNExtractor,
    StatisticsExtractor,
    attach_features,
    default_feature_spec,
    make_extractor,
)
from ggeval.graphs import Graph, GraphSet, erdos_renyi


def relabeled_copy(g: Graph, perm) -> Graph:
    edges = tuple(
        sorted((min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in g.edges)
    )
    feats = g.node_features[np.argsort(perm)] if g.node_features is not None else None
    return Graph(g.id, g.num_nodes, edges, node_features=feats)


@pytest.fixture
def featured_corpus(er_corpus):
    return attach_features(er_corpus, DegreeOneHot())


class TestAttachFeatures:
    def test_degree_one_hot_triangle(self, triangle):
        out = attach_features(GraphSet((triangle,)), DegreeOneHot(cap=4))
        feats = out[0].node_features
        assert feats.shape == (3, 5)
        assert np.all(feats[:, 2] == 1.0) and feats.sum() == 3

    def test_label_one_hot(self):
        g = Graph(0, 2, ((0, 1),), node_labels=(0, 1))
        out = attach_features(GraphSet((g,)), NodeLabelOneHot(num_classes=2))
        assert np.array_equal(out[0].node_features, np.eye(2))

    def test_degree_clipping(self):
        star = Graph(0, 101, tuple((0, i) for i in range(1, 101)))
        out = attach_features(GraphSet((star,)), DegreeOneHot(cap=63))
        assert out[0].node_features[0, 63] == 1.0

    def test_missing_labels_rejected(self, triangle):
        with pytest.raises(ValueError, match="no node labels"):
            attach_features(GraphSet((triangle,)), NodeLabelOneHot(num_classes=2))

    def test_label_out_of_range(self):
        g = Graph(0, 2, ((0, 1),), node_labels=(0, 5))
        with pytest.raises(ValueError, match="outside"):
            attach_features(GraphSet((g,)), NodeLabelOneHot(num_classes=2))

    def test_default_spec_prefers_labels(self):
        g = Graph(0, 2, ((0, 1),), node_labels=(0, 3))
        assert default_feature_spec(GraphSet((g,))) == NodeLabelOneHot(num_classes=4)
        assert default_feature_spec(GraphSet((Graph(0, 2, ((0, 1),)),))) == DegreeOneHot()


class TestStatisticsExtractor:
    def test_dimension(self, er_corpus):
        E = StatisticsExtractor().fit(er_corpus).transform(er_corpus)
        assert E.shape == (len(er_corpus), 74)

    def test_isomorphic_graphs_identical_rows(self, triangle):
        other = Graph(1, 3, ((0, 1), (0, 2), (1, 2)))
        E = StatisticsExtractor().fit_transform(GraphSet((triangle, other)))
        assert np.array_equal(E[0], E[1])

    def test_deterministic(self, er_corpus):
        ext = StatisticsExtractor().fit(er_corpus)
        assert np.array_equal(ext.transform(er_corpus), ext.transform(er_corpus))

    def test_get_params(self):
        assert StatisticsExtractor().get_params() == {"degree_bins": 64, "cc_bins": 10}


class TestRandomGNNExtractor:
    def test_same_seed_identical(self, featured_corpus):
        a = RandomGNNExtractor(seed=3).fit(featured_corpus).transform(featured_corpus)
        b = RandomGNNExtractor(seed=3).fit(featured_corpus).transform(featured_corpus)
        assert np.array_equal(a, b)

    def test_embedding_dimension(self, featured_corpus):
        E = RandomGNNExtractor(hidden_dim=8, num_layers=3).fit(featured_corpus).transform(featured_corpus)
        assert E.shape == (len(featured_corpus), 24)

    def test_permutation_invariance(self, featured_corpus):
        ext = RandomGNNExtractor(seed=0).fit(featured_corpus)
        rng = np.random.default_rng(1)
        g = featured_corpus[0]
        perm = rng.permutation(g.num_nodes)
        pair = featured_corpus.with_graphs([g, relabeled_copy(g, perm)])
        E = ext.transform(pair)
        assert np.allclose(E[0], E[1], atol=1e-9)

    def test_hand_case_two_node(self):
        g = Graph(0, 2, ((0, 1),), node_features=np.array([[1.0], [5.0]]))
        gset = GraphSet((g,))
        ext = RandomGNNExtractor(hidden_dim=1, num_layers=1, seed=0).fit(gset)
        ext.layers_[0].activation = "identity"
        ext.store_.params["enc0.w_neigh"][...] = 2.0
        ext.store_.params["enc0.w_self"][...] = 3.0
        ext.store_.params["enc0.bias"][...] = 0.0
        assert ext.transform(gset)[0, 0] == pytest.approx(15.0)

    def test_missing_features_rejected(self, er_corpus):
        with pytest.raises(ValueError):
            RandomGNNExtractor().fit(er_corpus)

    def test_feature_spec_featurizes_on_the_fly(self, er_corpus):
        ext = RandomGNNExtractor(feature_spec=DegreeOneHot(), seed=0).fit(er_corpus)
        E = ext.transform(er_corpus)
        assert E.shape[0] == len(er_corpus) and np.isfinite(E).all()


@pytest.fixture(scope="module")
def trained_gmae(er_corpus):
    gset = attach_features(er_corpus, DegreeOneHot())
    ext = GraphMAEExtractor(seed=1).fit(gset)
    return gset, ext


class TestGraphMAEExtractor:
    def test_zero_epochs_keeps_initialization(self, featured_corpus):
        ext = GraphMAEExtractor(epochs=0, seed=5).fit(featured_corpus)
        ref = GraphMAEExtractor(epochs=0, seed=5)
        ref._build(featured_corpus[0].node_features.shape[1])
        for name, p in ext.store_.params.items():
            assert np.array_equal(p, ref.store_.params[name])

    def test_training_deterministic(self, er_corpus):
        small = attach_features(er_corpus.with_graphs(er_corpus.graphs[:30]), DegreeOneHot())
        a = GraphMAEExtractor(epochs=3, seed=7).fit(small)
        b = GraphMAEExtractor(epochs=3, seed=7).fit(small)
        for name in a.store_.params:
            assert np.array_equal(a.store_.params[name], b.store_.params[name])
        assert a.epoch_losses_ == b.epoch_losses_

    def test_single_graph_node_branch_converges(self):
        g = Graph(0, 2, ((0, 1),), node_features=np.array([[1.0, 0.0], [0.0, 1.0]]))
        gset = GraphSet((g,))
        ext = GraphMAEExtractor(
            hidden_dim=4, num_layers=1, mask_rate=0.5, epochs=200,
            learning_rate=1e-2, seed=0,
        ).fit(gset)
        losses = ext.epoch_losses_
        assert np.mean(losses[-10:]) <= 0.5 * np.mean(losses[:10])

    def test_loss_trend_on_corpus(self, trained_gmae):
        _, ext = trained_gmae
        losses = ext.epoch_losses_
        assert np.mean(losses[-5:]) < np.mean(losses[:5])

    def test_extraction_repeatable(self, trained_gmae):
        gset, ext = trained_gmae
        assert np.array_equal(ext.transform(gset), ext.transform(gset))

    def test_embedding_dimension(self, trained_gmae):
        gset, ext = trained_gmae
        assert ext.transform(gset).shape == (len(gset), 64)

    def test_permutation_invariance(self, trained_gmae):
        gset, ext = trained_gmae
        g = gset[3]
        perm = np.random.default_rng(2).permutation(g.num_nodes)
        pair = gset.with_graphs([g, relabeled_copy(g, perm)])
        E = ext.transform(pair)
        assert np.allclose(E[0], E[1], atol=1e-9)

    def test_zero_edge_graph_forces_node_branch(self):
        g = Graph(0, 4, (), node_features=np.eye(4))
        GraphMAEExtractor(epochs=2, seed=0).fit(GraphSet((g,)))  # must not raise

    def test_param_round_trip(self, trained_gmae, tmp_path):
        gset, ext = trained_gmae
        path = tmp_path / "params.json"
        ext.save_params(str(path))
        loaded = GraphMAEExtractor(seed=1).load_params(str(path), ext.n_features_in_)
        assert np.array_equal(loaded.transform(gset), ext.transform(gset))

    def test_load_mismatched_config_rejected(self, trained_gmae, tmp_path):
        _, ext = trained_gmae
        path = tmp_path / "params.json"
        ext.save_params(str(path))
        with pytest.raises(ValueError):
            GraphMAEExtractor(hidden_dim=16).load_params(str(path), ext.n_features_in_)

    def test_bad_mask_rate(self, featured_corpus):
        with pytest.raises(ValueError):
            GraphMAEExtractor(mask_rate=1.5).fit(featured_corpus)


def test_make_extractor_unknown():
    with pytest.raises(ValueError):
        make_extractor("cnn")


def test_row_alignment_all_extractors(er_corpus):
    featured = attach_features(er_corpus.with_graphs(er_corpus.graphs[:20]), DegreeOneHot())
    for ext in (
        StatisticsExtractor(),
        RandomGNNExtractor(seed=0),
        GraphMAEExtractor(epochs=1, seed=0),
    ):
        E = ext.fit(featured).transform(featured)
        single = featured.with_graphs([featured[7]])
        assert np.allclose(ext.transform(single)[0], E[7])
