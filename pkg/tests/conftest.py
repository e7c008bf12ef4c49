import numpy as np
import pytest

from ggeval.graphs import Graph, GraphSet, erdos_renyi


@pytest.fixture
def triangle():
    return Graph(0, 3, ((0, 1), (0, 2), (1, 2)))


@pytest.fixture
def fixture_dir(tmp_path):
    """Hand-built two-graph TUDataset: graph 1 a triangle, graph 2 a single edge."""
    d = tmp_path / "tud"
    d.mkdir()
    (d / "FIX_A.txt").write_text(
        "1, 2\n2, 1\n2, 3\n3, 2\n1, 3\n3, 1\n4, 5\n5, 4\n"
    )
    (d / "FIX_graph_indicator.txt").write_text("1\n1\n1\n2\n2\n")
    return str(d)


@pytest.fixture
def fixture_dir_labeled(fixture_dir, tmp_path):
    (tmp_path / "tud" / "FIX_node_labels.txt").write_text("0\n1\n0\n1\n0\n")
    return fixture_dir


@pytest.fixture(scope="session")
def er_corpus():
    """200 Erdős–Rényi graphs, n=30, p=0.1; the standard smoke corpus."""
    rng = np.random.default_rng(0)
    graphs = [
        erdos_renyi(30, 0.1, int(rng.integers(0, 2**63)), graph_id=i)
        for i in range(200)
    ]
    return GraphSet(tuple(graphs))
