"""
Базовые операции над графом: не-рёбра, k-hop окрестности, индуцированные
подграфы, перестановка меток и сводная статистика.
"""
from typing import Iterable, List, Set, Tuple

import networkx as nx
import numpy as np
import structlog

from app.models.graph import Graph, GraphStats, PairRef, PairSet, Permutation
from app.utils.errors import InputError

logger = structlog.get_logger()


def non_edges(g: Graph) -> PairSet:
    """
    Перечисляет все пары, отсутствующие в E.

    Для ориентированного графа: упорядоченные пары (a, b), для неориентированного:
    нормализованные a <= b. Петли (a, a) входят только если self_loops_allowed.
    """
    adj = g.adjacency_matrix()
    candidates = np.ones((g.n, g.n), dtype=bool)
    if not g.directed:
        candidates = np.triu(candidates)
    if not g.self_loops_allowed:
        np.fill_diagonal(candidates, False)
    a, b = np.nonzero(candidates & ~adj)
    return PairSet(a, b, g.n, g.directed)


def total_pair_count(g: Graph) -> int:
    """Число всех пар в режиме графа (рёбра + не-рёбра)"""
    loops = g.n if g.self_loops_allowed else 0
    if g.directed:
        return g.n * (g.n - 1) + loops
    return g.n * (g.n - 1) // 2 + loops


def khop_nodes(g: Graph, pair: PairRef, k: int, respect_direction: bool = False) -> Set[int]:
    """
    Вершины, достижимые из a или b не более чем за k шагов.

    По умолчанию направление рёбер игнорируется; с respect_direction обход
    идёт только по исходящим рёбрам.
    """
    if k < 0:
        raise InputError(f"Hop count must be non-negative, got {k}")
    adj = g.out_adj if respect_direction else g.undirected_adj
    seen = {pair.a, pair.b}
    frontier = set(seen)
    for _ in range(k):
        nxt = set()
        for u in frontier:
            nxt.update(adj[u])
        nxt -= seen
        if not nxt:
            break
        seen |= nxt
        frontier = nxt
    return seen


def induced_subgraph(g: Graph, nodes: Iterable[int]) -> Tuple[Graph, List[int]]:
    """
    Индуцированный подграф на множестве вершин.

    Returns:
        Кортеж (подграф, mapping), где mapping[new_id] = original_id.
        Новые id назначаются по возрастанию исходных.
    """
    mapping = sorted(set(nodes))
    local = {v: i for i, v in enumerate(mapping)}
    edges = set()
    for v in mapping:
        i = local[v]
        if v in g.loops:
            edges.add((i, i))
        for w in g.out_adj[v]:
            j = local.get(w)
            if j is None:
                continue
            if g.directed:
                edges.add((i, j))
            elif i < j:
                edges.add((i, j))
    sub = Graph(
        n=len(mapping),
        directed=g.directed,
        edges=frozenset(edges),
        self_loops_allowed=g.self_loops_allowed,
        labels=tuple(g.labels[v] for v in mapping),
    )
    return sub, mapping


def permute(g: Graph, pi: Permutation) -> Graph:
    """Анонимизация: (a, b) ∈ E  <=>  (π(a), π(b)) ∈ E результата"""
    if pi.n != g.n:
        raise InputError(f"Permutation size {pi.n} does not match node count {g.n}")
    edges = set()
    for a, b in g.edges:
        x, y = pi(a), pi(b)
        if not g.directed and x > y:
            x, y = y, x
        edges.add((x, y))
    labels = [""] * g.n
    for v in range(g.n):
        labels[pi(v)] = g.labels[v]
    return Graph(
        n=g.n,
        directed=g.directed,
        edges=frozenset(edges),
        self_loops_allowed=g.self_loops_allowed,
        labels=tuple(labels),
    )


def without_edges(g: Graph, removed: Iterable[Tuple[int, int]]) -> Graph:
    """Граф H = (V, E \\ removed)"""
    return Graph(
        n=g.n,
        directed=g.directed,
        edges=g.edges - frozenset(removed),
        self_loops_allowed=g.self_loops_allowed,
        labels=g.labels,
    )


def to_networkx(g: Graph) -> nx.Graph:
    nxg = nx.DiGraph() if g.directed else nx.Graph()
    nxg.add_nodes_from(range(g.n))
    nxg.add_edges_from(g.edges)
    return nxg


def graph_stats(g: Graph) -> GraphStats:
    """
    Характеристики графа в духе таблицы датасетов.

    Диаметр и средний кратчайший путь считаются на наибольшей (слабо) связной
    компоненте без учёта направления. Петли не входят в число рёбер.
    """
    nxg = to_networkx(g)
    nxg.remove_edges_from(list(nx.selfloop_edges(nxg)))
    loops = len(g.loops)
    edge_count = g.num_edges - loops
    clustering = nx.average_clustering(nxg) if g.n else 0.0

    undirected = nxg.to_undirected() if g.directed else nxg
    diameter = None
    asp = None
    if g.n:
        largest = max(nx.connected_components(undirected), key=len)
        component = undirected.subgraph(largest)
        if component.number_of_nodes() > 1:
            diameter = nx.diameter(component)
            asp = nx.average_shortest_path_length(component)

    stats = GraphStats(
        directed=g.directed,
        nodes=g.n,
        edges=edge_count,
        self_loops=loops,
        average_degree=2 * edge_count / g.n if g.n else 0.0,
        average_clustering=float(clustering),
        diameter=diameter,
        average_shortest_path=asp,
    )
    logger.info("Graph statistics computed", nodes=stats.nodes, edges=stats.edges,
                diameter=stats.diameter)
    return stats
