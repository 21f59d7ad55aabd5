"""
Модели графа: Graph, PairRef, PairSet, Permutation.

Graph неизменяем после создания; все производные структуры (списки смежности,
матрица смежности, таблица меток) вычисляются лениво и только читаются.
"""
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, NamedTuple, Optional, Tuple

import numpy as np

from app.utils.errors import InputError, InvariantViolationError


class PairRef(NamedTuple):
    """Пара вершин (ребро или не-ребро); для неориентированных a <= b"""
    a: int
    b: int
    oriented: bool


def make_pair(a: int, b: int, oriented: bool) -> PairRef:
    """Создаёт пару, нормализуя порядок для неориентированного графа"""
    if not oriented and a > b:
        a, b = b, a
    return PairRef(a, b, oriented)


@dataclass(frozen=True)
class Graph:
    """Простой граф с плотными id 0..n-1 и таблицей внешних меток"""
    n: int
    directed: bool
    edges: FrozenSet[Tuple[int, int]]
    self_loops_allowed: bool = False
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.n < 0:
            raise InputError(f"Node count must be non-negative, got {self.n}")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(self.n)))
        elif len(self.labels) != self.n:
            raise InputError(f"Label table has {len(self.labels)} entries for {self.n} nodes")
        for a, b in self.edges:
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise InputError(f"Edge ({a}, {b}) references a node outside 0..{self.n - 1}")
            if not self.directed and a > b:
                raise InvariantViolationError(f"Undirected edge ({a}, {b}) is not normalized")
            if a == b and not self.self_loops_allowed:
                raise InvariantViolationError(f"Self-loop ({a}, {a}) in a graph without self-loops")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def loops(self) -> FrozenSet[int]:
        return frozenset(a for a, b in self.edges if a == b)

    @cached_property
    def out_adj(self) -> Tuple[Tuple[int, ...], ...]:
        """Исходящие соседи (для неориентированного графа: все соседи), без петель"""
        adj: List[List[int]] = [[] for _ in range(self.n)]
        for a, b in self.edges:
            if a == b:
                continue
            adj[a].append(b)
            if not self.directed:
                adj[b].append(a)
        return tuple(tuple(sorted(x)) for x in adj)

    @cached_property
    def in_adj(self) -> Tuple[Tuple[int, ...], ...]:
        """Входящие соседи (для неориентированного графа совпадает с out_adj)"""
        if not self.directed:
            return self.out_adj
        adj: List[List[int]] = [[] for _ in range(self.n)]
        for a, b in self.edges:
            if a != b:
                adj[b].append(a)
        return tuple(tuple(sorted(x)) for x in adj)

    @cached_property
    def undirected_adj(self) -> Tuple[Tuple[int, ...], ...]:
        """Соседи без учёта направления"""
        if not self.directed:
            return self.out_adj
        return tuple(
            tuple(sorted(set(self.out_adj[v]) | set(self.in_adj[v])))
            for v in range(self.n)
        )

    @cached_property
    def _label_index(self) -> Dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}

    def index_of(self, label: str) -> int:
        try:
            return self._label_index[label]
        except KeyError:
            raise InputError(f"Unknown node label '{label}'")

    def label_of(self, node: int) -> str:
        return self.labels[node]

    def has_edge(self, a: int, b: int) -> bool:
        if not self.directed and a > b:
            a, b = b, a
        return (a, b) in self.edges

    def sorted_edges(self) -> List[Tuple[int, int]]:
        return sorted(self.edges)

    def degrees(self) -> List[int]:
        """Степени вершин (для ориентированного: входящие + исходящие, петля считается дважды)"""
        deg = [0] * self.n
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def adjacency_matrix(self) -> np.ndarray:
        """Булева матрица смежности n x n (симметричная для неориентированного графа)"""
        adj = np.zeros((self.n, self.n), dtype=bool)
        if self.edges:
            arr = np.array(sorted(self.edges), dtype=np.int64)
            adj[arr[:, 0], arr[:, 1]] = True
            if not self.directed:
                adj[arr[:, 1], arr[:, 0]] = True
        return adj

    def pair(self, a: int, b: int) -> PairRef:
        return make_pair(a, b, self.directed)


class PairSet(Sequence):
    """
    Упорядоченное множество пар на массивах numpy.

    Пары хранятся по возрастанию ключа a * n + b, поэтому поиск индекса:
    бинарный поиск. Ведёт себя как Sequence[PairRef].
    """

    def __init__(self, a: np.ndarray, b: np.ndarray, n: int, oriented: bool):
        self.a = np.asarray(a, dtype=np.int64)
        self.b = np.asarray(b, dtype=np.int64)
        self.n = n
        self.oriented = oriented
        self.keys = self.a * max(n, 1) + self.b
        if len(self.keys) > 1 and np.any(np.diff(self.keys) <= 0):
            raise InvariantViolationError("PairSet keys must be strictly increasing")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, int]], n: int, oriented: bool) -> "PairSet":
        normalized = sorted({tuple(make_pair(a, b, oriented)[:2]) for a, b in pairs})
        if not normalized:
            return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), n, oriented)
        arr = np.array(normalized, dtype=np.int64)
        return cls(arr[:, 0], arr[:, 1], n, oriented)

    def __len__(self) -> int:
        return len(self.keys)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(len(self)))]
        return PairRef(int(self.a[index]), int(self.b[index]), self.oriented)

    def __iter__(self) -> Iterator[PairRef]:
        for a, b in zip(self.a.tolist(), self.b.tolist()):
            yield PairRef(a, b, self.oriented)

    def indices_of(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Индексы пар (a[i], b[i]); -1 для отсутствующих. Нормализует неориентированные пары."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if not self.oriented:
            a, b = np.minimum(a, b), np.maximum(a, b)
        keys = a * max(self.n, 1) + b
        if len(self.keys) == 0:
            return np.full(len(keys), -1, dtype=np.int64)
        pos = np.minimum(np.searchsorted(self.keys, keys), len(self.keys) - 1)
        return np.where(self.keys[pos] == keys, pos, -1)

    def index_of(self, pair: PairRef) -> int:
        return int(self.indices_of(np.array([pair.a]), np.array([pair.b]))[0])

    def __contains__(self, pair) -> bool:
        return self.index_of(make_pair(pair[0], pair[1], self.oriented)) >= 0


@dataclass(frozen=True)
class Permutation:
    """Биекция на 0..n-1; image[v]: образ вершины v"""
    image: Tuple[int, ...]

    def __post_init__(self):
        n = len(self.image)
        if sorted(self.image) != list(range(n)):
            raise InvariantViolationError("Permutation image is not a bijection on 0..n-1")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @property
    def n(self) -> int:
        return len(self.image)

    def __call__(self, v: int) -> int:
        return self.image[v]

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for v, w in enumerate(self.image):
            inv[w] = v
        return Permutation(tuple(inv))

    def compose(self, other: "Permutation") -> "Permutation":
        """self ∘ other: v -> self(other(v))"""
        return Permutation(tuple(self.image[w] for w in other.image))

    def is_identity(self) -> bool:
        return all(v == w for v, w in enumerate(self.image))

    def support(self) -> Dict[int, int]:
        """Сдвигаемые точки: {v: image[v]} для v != image[v]"""
        return {v: w for v, w in enumerate(self.image) if v != w}

    def as_array(self) -> np.ndarray:
        return np.asarray(self.image, dtype=np.int64)


@dataclass(frozen=True)
class GraphStats:
    """Сводные характеристики графа (строка таблицы датасетов)"""
    directed: bool
    nodes: int
    edges: int
    self_loops: int
    average_degree: float
    average_clustering: float
    diameter: Optional[int]
    average_shortest_path: Optional[float]
