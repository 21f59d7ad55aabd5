"""
Общие графы для тестов.

Остаточный граф kite: треугольники c-f-d и d-b-e с общей вершиной d
и висячая вершина a. Плотные id в порядке появления: c0 f1 d2 a3 b4 e5.
Скрытые рёбра (позитивы): a-b, a-e, e-f.
"""
import networkx as nx
import pytest

from app.models.graph import Graph
from app.utils.edge_list import load_edge_list

KITE_EDGE_LIST = "c f\nf d\nd c\nd a\nd b\nd e\ne b\n"
KITE_POSITIVES = [("a", "b"), ("a", "e"), ("e", "f")]


def graph_from_edges(n, edges, directed=False):
    normalized = set()
    for a, b in edges:
        if not directed and a > b:
            a, b = b, a
        normalized.add((a, b))
    return Graph(n=n, directed=directed, edges=frozenset(normalized),
                 self_loops_allowed=any(a == b for a, b in normalized))


def graph_from_networkx(nxg):
    nxg = nx.convert_node_labels_to_integers(nxg)
    return graph_from_edges(nxg.number_of_nodes(), nxg.edges(), nxg.is_directed())


def cycle(n):
    return graph_from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star(leaves):
    return graph_from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def asymmetric_tree():
    """Ветви длины 1, 2 и 3 из вершины 0: только тождественный автоморфизм"""
    return graph_from_edges(7, [(0, 1), (0, 2), (2, 3), (0, 4), (4, 5), (5, 6)])


def kite_positive_ids(g):
    return [g.pair(g.index_of(a), g.index_of(b))[:2] for a, b in KITE_POSITIVES]


@pytest.fixture
def kite_graph():
    return load_edge_list(KITE_EDGE_LIST, directed=False)


@pytest.fixture
def kite_positives(kite_graph):
    return kite_positive_ids(kite_graph)


@pytest.fixture
def small_graphs():
    """Графы с n <= 8 для сравнения с перебором"""
    graphs = {
        "kite": load_edge_list(KITE_EDGE_LIST, directed=False),
        "c6": cycle(6),
        "c4": cycle(4),
        "p3": graph_from_edges(3, [(0, 1), (1, 2)]),
        "star5": star(5),
        "tree": asymmetric_tree(),
        "k5_minus_edge": graph_from_edges(5, [(a, b) for a in range(5) for b in range(a + 1, 5) if (a, b) != (0, 1)]),
        "isolated": graph_from_edges(6, [(0, 1)]),
        "directed_2cycle": graph_from_edges(2, [(0, 1), (1, 0)], directed=True),
        "directed_3cycle": graph_from_edges(3, [(0, 1), (1, 2), (2, 0)], directed=True),
        "directed_path": graph_from_edges(4, [(0, 1), (1, 2), (2, 3)], directed=True),
        "loops": graph_from_edges(4, [(0, 0), (0, 1), (1, 2), (2, 3), (3, 3)]),
    }
    for seed in range(4):
        graphs[f"gnp7_{seed}"] = graph_from_networkx(nx.gnp_random_graph(7, 0.4, seed=seed))
        graphs[f"dgnp6_{seed}"] = graph_from_networkx(nx.gnp_random_graph(6, 0.35, seed=seed, directed=True))
    return graphs
