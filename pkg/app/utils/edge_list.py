"""
Загрузка графа из текстового списка рёбер.

Формат: одна строка: "src dst" или "src dst weight", разделитель: пробелы.
Строки, начинающиеся с '#' или '%': комментарии. Вес разбирается и отбрасывается.
"""
import hashlib
from pathlib import Path
from typing import Dict, Iterable, List, Set, Tuple, Union

import structlog

from app.models.graph import Graph
from app.utils.errors import EmptyGraphError, GraphParseError, InputError

logger = structlog.get_logger()

COMMENT_PREFIXES = ("#", "%")


def load_edge_list(
    text: Union[str, Iterable[str]],
    directed: bool,
    keep_self_loops: bool = True,
    include_self_loops: bool = False,
) -> Graph:
    """
    Разбирает список рёбер в Graph.

    Args:
        text: Содержимое файла (строка или итератор строк)
        directed: Ориентированный граф
        keep_self_loops: Сохранять петли из файла
        include_self_loops: Перечислять петли как не-рёбра даже если в файле их нет

    Returns:
        Graph с плотной нумерацией вершин в порядке первого появления

    Raises:
        GraphParseError: Строка не из 2-3 токенов или нечисловой вес
        EmptyGraphError: В файле нет ни одной вершины
    """
    lines = text.splitlines() if isinstance(text, str) else text
    index: Dict[str, int] = {}
    labels: List[str] = []
    edges: Set[Tuple[int, int]] = set()
    dropped_loops = 0
    duplicates = 0

    def node_id(label: str) -> int:
        if label not in index:
            index[label] = len(labels)
            labels.append(label)
        return index[label]

    for line_number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith(COMMENT_PREFIXES):
            continue
        tokens = line.split()
        if len(tokens) not in (2, 3):
            raise GraphParseError(line_number, f"expected 2 or 3 tokens, got {len(tokens)}")
        if len(tokens) == 3:
            try:
                float(tokens[2])
            except ValueError:
                raise GraphParseError(line_number, f"weight '{tokens[2]}' is not a number")

        a = node_id(tokens[0])
        b = node_id(tokens[1])
        if a == b and not keep_self_loops:
            dropped_loops += 1
            continue
        if not directed and a > b:
            a, b = b, a
        if (a, b) in edges:
            duplicates += 1
            continue
        edges.add((a, b))

    if not labels:
        raise EmptyGraphError("Edge list contains no nodes")

    has_loops = any(a == b for a, b in edges)
    graph = Graph(
        n=len(labels),
        directed=directed,
        edges=frozenset(edges),
        self_loops_allowed=has_loops or include_self_loops,
        labels=tuple(labels),
    )
    logger.info(
        "Edge list loaded",
        nodes=graph.n,
        edges=graph.num_edges,
        directed=directed,
        self_loops=len(graph.loops),
        dropped_self_loops=dropped_loops,
        duplicate_edges=duplicates,
    )
    return graph


def read_graph_file(
    path: Union[str, Path],
    directed: bool,
    keep_self_loops: bool = True,
    include_self_loops: bool = False,
) -> Tuple[Graph, str]:
    """
    Читает граф из файла.

    Returns:
        Кортеж (граф, sha256 содержимого файла)
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise InputError(f"Cannot read graph file '{path}': {e}")
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise InputError(f"Graph file '{path}' is not UTF-8: {e}")
    graph = load_edge_list(text, directed, keep_self_loops, include_self_loops)
    return graph, hashlib.sha256(raw).hexdigest()
