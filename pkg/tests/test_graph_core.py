"""
Тесты загрузки списка рёбер и базовых операций над графом.
"""
import numpy as np
import pytest

from app.models.graph import Graph, PairSet, Permutation, make_pair
from app.services.graph_core import (
    graph_stats,
    induced_subgraph,
    khop_nodes,
    non_edges,
    permute,
    total_pair_count,
    without_edges,
)
from app.utils.edge_list import load_edge_list, read_graph_file
from app.utils.errors import EmptyGraphError, GraphParseError, InputError, InvariantViolationError
from tests.conftest import KITE_EDGE_LIST, graph_from_edges


class TestLoadEdgeList:
    """Тесты разбора списка рёбер"""

    def test_simple_undirected(self):
        """Тест простого неориентированного графа"""
        g = load_edge_list("a b\nb c", directed=False)
        assert g.n == 3
        assert g.num_edges == 2
        assert g.labels == ("a", "b", "c")

    def test_self_loops_dropped(self):
        """Тест отбрасывания петель"""
        g = load_edge_list("a a\na b", directed=False, keep_self_loops=False)
        assert g.n == 2
        assert g.num_edges == 1
        assert len(g.loops) == 0
        assert not g.self_loops_allowed

    def test_self_loops_kept(self):
        """Тест сохранения петель: петли входят и в вселенную не-рёбер"""
        g = load_edge_list("a a\na b\nb c", directed=False)
        assert g.loops == frozenset({0})
        assert g.self_loops_allowed

    def test_include_self_loops_flag(self):
        """Тест принудительного включения петель во вселенную пар"""
        g = load_edge_list("a b", directed=False, include_self_loops=True)
        assert g.self_loops_allowed
        assert len(non_edges(g)) == 2

    def test_duplicates_and_reciprocal_collapse(self):
        """Тест схлопывания дубликатов и обратных рёбер"""
        g = load_edge_list("a b\nb a\na b", directed=False)
        assert g.num_edges == 1
        d = load_edge_list("a b\nb a\na b", directed=True)
        assert d.num_edges == 2

    def test_weights_and_comments(self):
        """Тест комментариев и отбрасывания весов"""
        text = "# header\n% matrix market\n\na b 0.5\nb c 2\n"
        g = load_edge_list(text, directed=True)
        assert g.n == 3
        assert g.sorted_edges() == [(0, 1), (1, 2)]

    def test_first_appearance_order(self):
        """Тест нумерации в порядке первого появления"""
        g = load_edge_list(KITE_EDGE_LIST, directed=False)
        assert g.labels == ("c", "f", "d", "a", "b", "e")
        assert g.index_of("a") == 3
        assert g.label_of(5) == "e"

    def test_malformed_line(self):
        """Тест ошибки разбора с номером строки"""
        with pytest.raises(GraphParseError) as exc:
            load_edge_list("a b\nc\n", directed=False)
        assert exc.value.line_number == 2
        assert "line 2" in exc.value.message

    def test_bad_weight(self):
        """Тест нечислового веса"""
        with pytest.raises(GraphParseError, match="line 1"):
            load_edge_list("a b heavy", directed=False)

    def test_empty_graph(self):
        """Тест пустого файла"""
        with pytest.raises(EmptyGraphError):
            load_edge_list("# nothing\n", directed=False)

    def test_unknown_label(self):
        """Тест обращения к несуществующей метке"""
        g = load_edge_list("a b", directed=False)
        with pytest.raises(InputError):
            g.index_of("z")

    def test_read_graph_file_digest(self, tmp_path):
        """Тест чтения файла: граф и sha256 содержимого"""
        path = tmp_path / "kite.edges"
        path.write_text(KITE_EDGE_LIST, encoding="utf-8")
        g, digest = read_graph_file(path, directed=False)
        assert g.num_edges == 7
        assert len(digest) == 64

    def test_read_graph_file_not_utf8(self, tmp_path):
        """Тест файла не в UTF-8"""
        path = tmp_path / "bad.edges"
        path.write_bytes(b"\xff\xfe a b")
        with pytest.raises(InputError, match="UTF-8"):
            read_graph_file(path, directed=False)


class TestGraphModel:
    """Тесты инвариантов Graph, PairSet и Permutation"""

    def test_unnormalized_undirected_edge(self):
        """Тест: неориентированное ребро (b, a) при b > a запрещено"""
        with pytest.raises(InvariantViolationError):
            Graph(n=2, directed=False, edges=frozenset({(1, 0)}))

    def test_loop_without_permission(self):
        """Тест: петля без self_loops_allowed запрещена"""
        with pytest.raises(InvariantViolationError):
            Graph(n=2, directed=False, edges=frozenset({(0, 0)}))

    def test_edge_out_of_range(self):
        """Тест ребра за пределами 0..n-1"""
        with pytest.raises(InputError):
            Graph(n=2, directed=True, edges=frozenset({(0, 2)}))

    def test_make_pair_normalizes(self):
        """Тест нормализации неориентированной пары"""
        assert make_pair(4, 1, oriented=False)[:2] == (1, 4)
        assert make_pair(4, 1, oriented=True)[:2] == (4, 1)

    def test_pairset_lookup(self):
        """Тест поиска индекса пары"""
        pairs = PairSet.from_pairs([(3, 1), (0, 2), (2, 4)], n=5, oriented=False)
        assert [tuple(p[:2]) for p in pairs] == [(0, 2), (1, 3), (2, 4)]
        assert pairs.index_of(make_pair(1, 3, False)) == 1
        assert (3, 1) in pairs
        assert (0, 1) not in pairs
        idx = pairs.indices_of(np.array([4, 0]), np.array([2, 1]))
        assert idx.tolist() == [2, -1]

    def test_permutation_must_be_bijection(self):
        """Тест: образ перестановки обязан быть биекцией"""
        with pytest.raises(InvariantViolationError):
            Permutation((0, 0, 1))

    def test_permutation_inverse(self):
        """Тест композиции с обратной"""
        pi = Permutation((2, 0, 3, 1))
        assert pi.compose(pi.inverse()).is_identity()
        assert pi.support() == {0: 2, 1: 0, 2: 3, 3: 1}


class TestNonEdges:
    """Тесты перечисления не-рёбер"""

    def test_kite_count(self, kite_graph):
        """Тест: C(6,2) - 7 = 8 не-рёбер"""
        assert len(non_edges(kite_graph)) == 8

    def test_triangle_has_none(self):
        """Тест полного треугольника"""
        g = graph_from_edges(3, [(0, 1), (1, 2), (0, 2)])
        assert len(non_edges(g)) == 0

    def test_directed_pair(self):
        """Тест ориентированного графа из одного ребра"""
        g = graph_from_edges(2, [(0, 1)], directed=True)
        assert [tuple(p[:2]) for p in non_edges(g)] == [(1, 0)]

    def test_no_edge_is_listed(self, small_graphs):
        """Тест: ни одно ребро не попадает в не-рёбра и счёт пар сходится"""
        for name, g in small_graphs.items():
            pairs = non_edges(g)
            assert not any(g.has_edge(p.a, p.b) for p in pairs), name
            assert g.num_edges + len(pairs) == total_pair_count(g), name
            if not g.self_loops_allowed:
                assert not any(p.a == p.b for p in pairs), name

    def test_self_loop_universe(self):
        """Тест петель во вселенной: n(n-1) + n - |E| для орграфа"""
        g = graph_from_edges(3, [(0, 0), (0, 1)], directed=True)
        assert len(non_edges(g)) == 3 * 2 + 3 - 2
        assert (1, 1) in non_edges(g)


class TestNeighbourhoods:
    """Тесты k-hop окрестностей и индуцированных подграфов"""

    def test_zero_hops(self, kite_graph):
        """Тест: при k = 0 только концы пары"""
        a, b = kite_graph.index_of("a"), kite_graph.index_of("b")
        assert khop_nodes(kite_graph, kite_graph.pair(a, b), 0) == {a, b}

    def test_one_hop_of_pendant(self, kite_graph):
        """Тест: N_1(a) = {a, d}"""
        a, d = kite_graph.index_of("a"), kite_graph.index_of("d")
        assert khop_nodes(kite_graph, kite_graph.pair(a, a), 1) == {a, d}

    def test_monotone_and_saturating(self, kite_graph):
        """Тест монотонности по k и насыщения на компоненте"""
        pair = kite_graph.pair(0, 3)
        previous = set()
        for k in range(5):
            current = khop_nodes(kite_graph, pair, k)
            assert previous <= current
            previous = current
        assert previous == set(range(kite_graph.n))

    def test_direction_respected(self):
        """Тест обхода только по исходящим рёбрам"""
        g = graph_from_edges(3, [(1, 0), (1, 2)], directed=True)
        pair = g.pair(0, 0)
        assert khop_nodes(g, pair, 1) == {0, 1}
        assert khop_nodes(g, pair, 1, respect_direction=True) == {0}

    def test_negative_hops(self, kite_graph):
        """Тест отрицательного k"""
        with pytest.raises(InputError):
            khop_nodes(kite_graph, kite_graph.pair(0, 1), -1)

    def test_induced_subgraph(self, kite_graph):
        """Тест подграфа на {a, d, b}: рёбра d-a и d-b"""
        nodes = {kite_graph.index_of(x) for x in "adb"}
        sub, mapping = induced_subgraph(kite_graph, nodes)
        assert mapping == sorted(nodes)
        named = {frozenset((sub.label_of(x), sub.label_of(y))) for x, y in sub.edges}
        assert named == {frozenset("da"), frozenset("db")}

    def test_induced_full_and_empty(self, kite_graph):
        """Тест подграфа на всех вершинах и на пустом множестве"""
        full, _ = induced_subgraph(kite_graph, range(kite_graph.n))
        assert full.edges == kite_graph.edges
        empty, mapping = induced_subgraph(kite_graph, [])
        assert empty.n == 0 and mapping == []


class TestPermute:
    """Тесты анонимизации перестановкой"""

    def test_identity(self, kite_graph):
        """Тест тождественной перестановки"""
        assert permute(kite_graph, Permutation.identity(6)).edges == kite_graph.edges

    def test_degree_multiset(self, kite_graph):
        """Тест сохранения мультимножества степеней"""
        rng = np.random.default_rng(3)
        for _ in range(20):
            pi = Permutation(tuple(rng.permutation(6).tolist()))
            h = permute(kite_graph, pi)
            assert sorted(h.degrees()) == [1, 2, 2, 2, 2, 5]
            assert h.num_edges == 7
            assert permute(h, pi.inverse()).edges == kite_graph.edges

    def test_labels_follow_nodes(self, kite_graph):
        """Тест: внешняя метка переезжает вместе с вершиной"""
        pi = Permutation((5, 4, 3, 2, 1, 0))
        h = permute(kite_graph, pi)
        assert h.label_of(pi(kite_graph.index_of("d"))) == "d"

    def test_size_mismatch(self, kite_graph):
        """Тест перестановки неверного размера"""
        with pytest.raises(InputError):
            permute(kite_graph, Permutation.identity(5))

    def test_without_edges(self, kite_graph):
        """Тест удаления рёбер"""
        h = without_edges(kite_graph, [(0, 1)])
        assert h.num_edges == 6
        assert not h.has_edge(0, 1)


class TestGraphStats:
    """Тесты сводных характеристик графа"""

    def test_triangle(self):
        """Тест треугольника"""
        stats = graph_stats(graph_from_edges(3, [(0, 1), (1, 2), (0, 2)]))
        assert stats.average_degree == pytest.approx(2.0)
        assert stats.average_clustering == pytest.approx(1.0)
        assert stats.diameter == 1
        assert stats.average_shortest_path == pytest.approx(1.0)

    def test_kite(self, kite_graph):
        """Тест графа kite"""
        stats = graph_stats(kite_graph)
        assert stats.nodes == 6
        assert stats.edges == 7
        assert stats.self_loops == 0
        assert stats.average_degree == pytest.approx(7 / 3)
        assert stats.diameter == 2

    def test_self_loops_counted_apart(self):
        """Тест: петли не входят в число рёбер"""
        stats = graph_stats(graph_from_edges(3, [(0, 0), (0, 1), (1, 2)]))
        assert stats.edges == 2
        assert stats.self_loops == 1
