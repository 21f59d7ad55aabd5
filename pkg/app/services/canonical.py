"""
Канонические формы, порождающие группы автоморфизмов и орбиты пар.

Поиск individualization–refinement:
  - уточнение раскраски до грубейшего эквитабельного разбиения (очередь
    расщепителей, порядок клеток инвариантен к перенумерации);
  - целевая клетка: первая наименьшая неодноэлементная, вершины по возрастанию id;
  - канонический код: лексикографически минимальная кодировка смежности
    по всем листьям дерева поиска;
  - автоморфизмы записываются при совпадении кода листа с первым или лучшим
    листом и используются для отсечения эквивалентных поддеревьев.
Близнецы (вершины с одинаковыми окрестностями и цветом) заранее дают
транспозиции-автоморфизмы, что сразу схлопывает изолированные вершины и
веера листьев.
"""
import hashlib
import os
from collections import defaultdict, deque
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from networkx.utils import UnionFind
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from app.models.canonical import CanonicalCode, CanonicalResult, Coloring, GeneratorSet
from app.models.graph import Graph, PairSet, Permutation
from app.utils.errors import InputError, InvariantViolationError, ResourceLimitError

logger = structlog.get_logger()

CANONICAL_NODE_CAP = int(os.getenv("LPL_CANONICAL_NODE_CAP", "100000"))


def _digest(code: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(code, digest_size=8).digest(), "big")


def _check_coloring(g: Graph, init: Coloring) -> None:
    if init.n != g.n:
        raise InputError(f"Coloring has {init.n} entries for {g.n} nodes")


class _OrderedPartition:
    """
    Упорядоченное разбиение вершин.

    Клетка идентифицируется своей начальной позицией start; цвет вершины:
    ранг её клетки. Для дискретного разбиения start совпадает с позицией
    вершины в канонической разметке.
    """
    __slots__ = ("cell_of", "cells")

    def __init__(self, cell_of: List[int], cells: Dict[int, List[int]]):
        self.cell_of = cell_of
        self.cells = cells

    @classmethod
    def from_coloring(cls, coloring: Sequence[int]) -> "_OrderedPartition":
        groups: Dict[int, List[int]] = defaultdict(list)
        for v, c in enumerate(coloring):
            groups[c].append(v)
        cell_of = [0] * len(coloring)
        cells: Dict[int, List[int]] = {}
        start = 0
        for c in sorted(groups):
            members = groups[c]
            cells[start] = members
            for v in members:
                cell_of[v] = start
            start += len(members)
        return cls(cell_of, cells)

    def copy(self) -> "_OrderedPartition":
        return _OrderedPartition(list(self.cell_of), {s: list(m) for s, m in self.cells.items()})

    def is_discrete(self) -> bool:
        return len(self.cells) == len(self.cell_of)

    def starts(self) -> List[int]:
        return sorted(self.cells)

    def target_cell(self) -> Optional[List[int]]:
        """Первая наименьшая неодноэлементная клетка"""
        best: Optional[int] = None
        best_size = 0
        for s in sorted(self.cells):
            size = len(self.cells[s])
            if size > 1 and (best is None or size < best_size):
                best, best_size = s, size
                if size == 2:
                    break
        return None if best is None else sorted(self.cells[best])

    def colors(self) -> Tuple[int, ...]:
        rank = {s: i for i, s in enumerate(sorted(self.cells))}
        return tuple(rank[s] for s in self.cell_of)

    def split(self, start: int, groups: List[List[int]]) -> List[int]:
        """Заменяет клетку start группами в заданном порядке; возвращает новые start"""
        new_starts = []
        pos = start
        for members in groups:
            self.cells[pos] = members
            for v in members:
                self.cell_of[v] = pos
            new_starts.append(pos)
            pos += len(members)
        return new_starts

    def individualize(self, v: int) -> int:
        """Выделяет v в одноэлементную клетку перед остальной клеткой; возвращает её start"""
        start = self.cell_of[v]
        rest = [u for u in self.cells[start] if u != v]
        self.split(start, [[v], rest])
        return start


class _Refiner:
    """Уточнение упорядоченного разбиения до эквитабельного"""

    def __init__(self, g: Graph):
        self.directed = g.directed
        self.out_adj = g.out_adj
        self.in_adj = g.in_adj

    def refine(self, part: _OrderedPartition, queue: Iterable[int]) -> _OrderedPartition:
        pending = deque(sorted(set(queue)))
        in_queue = set(pending)
        while pending and not part.is_discrete():
            w_start = pending.popleft()
            in_queue.discard(w_start)
            splitter = part.cells[w_start]

            counts: Dict[int, List[int]] = {}
            for w in splitter:
                # u -> w: у u есть исходящий сосед в расщепителе
                for u in self.in_adj[w]:
                    counts.setdefault(u, [0, 0])[0] += 1
                if self.directed:
                    for u in self.out_adj[w]:
                        counts.setdefault(u, [0, 0])[1] += 1
            if not counts:
                continue

            affected = sorted({part.cell_of[u] for u in counts})
            for start in affected:
                members = part.cells[start]
                if len(members) == 1:
                    continue
                buckets: Dict[Tuple[int, int], List[int]] = defaultdict(list)
                for x in members:
                    c = counts.get(x)
                    buckets[(c[0], c[1]) if c else (0, 0)].append(x)
                if len(buckets) == 1:
                    continue
                groups = [sorted(buckets[key]) for key in sorted(buckets)]
                new_starts = part.split(start, groups)
                if start in in_queue:
                    enqueue = new_starts[1:]
                else:
                    sizes = [len(m) for m in groups]
                    largest = sizes.index(max(sizes))
                    enqueue = [s for i, s in enumerate(new_starts) if i != largest]
                for s in enqueue:
                    if s not in in_queue:
                        in_queue.add(s)
                        pending.append(s)
        return part

    def initial(self, g: Graph, init: Coloring) -> _OrderedPartition:
        # петли различают вершины ещё до уточнения
        keys = [(c, v in g.loops) for v, c in enumerate(init.color)]
        part = _OrderedPartition.from_coloring(Coloring.from_keys(keys).color)
        return self.refine(part, part.starts())


def color_refine(g: Graph, init: Coloring) -> Coloring:
    """
    Грубейшее устойчивое уточнение раскраски (1-мерный Weisfeiler–Lehman).

    Вершины остаются в одном классе, только если у них совпадали исходный цвет
    и мультимножества цветов соседей (для орграфа: входящих и исходящих).
    Порядок классов эквивариантен к перенумерации вершин.
    """
    _check_coloring(g, init)
    part = _Refiner(g).initial(g, init)
    return Coloring(part.colors())


def endpoint_coloring(n: int, a: int, b: int, directed: bool) -> Coloring:
    """
    Раскраска концов пары: в орграфе источник и приёмник получают разные цвета,
    в неориентированном: общий цвет; остальные вершины: последний цвет.
    """
    keys = []
    for v in range(n):
        if v == a:
            keys.append(0)
        elif v == b:
            keys.append(1 if directed else 0)
        else:
            keys.append(2)
    return Coloring.from_keys(keys)


def is_automorphism(g: Graph, perm: Permutation, init: Optional[Coloring] = None) -> bool:
    """Проверяет, что перестановка сохраняет E (и раскраску, если задана)"""
    if perm.n != g.n:
        return False
    if init is not None and any(init.color[v] != init.color[perm(v)] for v in range(g.n)):
        return False
    for a, b in g.edges:
        if not g.has_edge(perm(a), perm(b)):
            return False
    return True


def twin_generators(g: Graph, init: Coloring) -> List[Permutation]:
    """
    Транспозиции близнецов: вершин одного цвета с одинаковыми окрестностями
    (несмежные близнецы) или одинаковыми замкнутыми окрестностями (смежные).
    Каждая транспозиция: автоморфизм раскрашенного графа.
    """
    _check_coloring(g, init)
    groups: Dict[tuple, List[int]] = defaultdict(list)
    for v in range(g.n):
        base = (init.color[v], v in g.loops)
        out_set = frozenset(g.out_adj[v])
        in_set = frozenset(g.in_adj[v])
        groups[("open",) + base + (out_set, in_set)].append(v)
        groups[("closed",) + base + (out_set | {v}, in_set | {v})].append(v)

    seen_pairs = set()
    generators = []
    for key in sorted(groups, key=lambda k: (k[0], min(groups[k]))):
        members = sorted(groups[key])
        for u, w in zip(members, members[1:]):
            if (u, w) in seen_pairs:
                continue
            seen_pairs.add((u, w))
            image = list(range(g.n))
            image[u], image[w] = w, u
            generators.append(Permutation(tuple(image)))
    return generators


class _Frame:
    """Узел дерева поиска в явном стеке"""
    __slots__ = ("part", "path", "on_first_path", "cell", "next_index",
                 "explored", "orbit_gen_count", "orbits")

    def __init__(self, part: _OrderedPartition, path: Tuple[int, ...], on_first_path: bool,
                 cell: List[int]):
        self.part = part
        self.path = path
        self.on_first_path = on_first_path
        self.cell = cell
        self.next_index = 0
        self.explored: List[int] = []
        self.orbit_gen_count = -1
        self.orbits: Optional[UnionFind] = None


class _Search:
    """Поиск individualization–refinement с отсечением по автоморфизмам"""

    def __init__(self, g: Graph, init: Coloring):
        self.g = g
        self.init = init
        self.refiner = _Refiner(g)
        self.first_code: Optional[bytes] = None
        self.first_labeling: Optional[Tuple[int, ...]] = None
        self.best_code: Optional[bytes] = None
        self.best_labeling: Optional[Tuple[int, ...]] = None
        self.generators: List[Permutation] = []
        self.supports: List[Dict[int, int]] = []
        self.leaves = 0
        self._seen_generators = set()
        edges = np.array(sorted(g.edges), dtype=np.int64).reshape(-1, 2)
        self._edge_src = edges[:, 0]
        self._edge_dst = edges[:, 1]
        self._header = np.array(
            [g.n, int(g.directed), int(g.self_loops_allowed), g.num_edges], dtype=">u8"
        ).tobytes()

    def _add_generator(self, perm: Permutation) -> None:
        if perm.is_identity() or perm.image in self._seen_generators:
            return
        self._seen_generators.add(perm.image)
        self.generators.append(perm)
        self.supports.append(perm.support())

    def _encode(self, labeling: Sequence[int]) -> bytes:
        """Кодировка смежности при разметке labeling[v] = позиция v"""
        n = self.g.n
        pos = np.asarray(labeling, dtype=np.int64)
        colors = np.empty(n, dtype=np.int64)
        colors[pos] = np.asarray(self.init.color, dtype=np.int64)
        src = pos[self._edge_src]
        dst = pos[self._edge_dst]
        if not self.g.directed:
            src, dst = np.minimum(src, dst), np.maximum(src, dst)
        keys = np.sort(src * max(n, 1) + dst)
        return self._header + colors.astype(">u8").tobytes() + keys.astype(">u8").tobytes()

    def _leaf(self, part: _OrderedPartition) -> bool:
        """Обрабатывает лист; True: найден автоморфизм к первому листу"""
        self.leaves += 1
        labeling = tuple(part.cell_of)
        code = self._encode(labeling)
        if self.first_code is None:
            self.first_code = self.best_code = code
            self.first_labeling = self.best_labeling = labeling
            return False
        if code == self.first_code:
            self._add_generator(self._mapping(self.first_labeling, labeling))
            return True
        if code == self.best_code:
            self._add_generator(self._mapping(self.best_labeling, labeling))
        elif code < self.best_code:
            self.best_code = code
            self.best_labeling = labeling
        return False

    @staticmethod
    def _mapping(source: Tuple[int, ...], target: Tuple[int, ...]) -> Permutation:
        """Автоморфизм, переводящий вершину с позицией p в source в вершину с позицией p в target"""
        at_position = [0] * len(target)
        for v, p in enumerate(target):
            at_position[p] = v
        return Permutation(tuple(at_position[p] for p in source))

    def _pruned(self, frame: _Frame, v: int) -> bool:
        """v эквивалентна уже исследованной вершине относительно автоморфизмов, фиксирующих путь"""
        if not frame.explored:
            return False
        if frame.orbit_gen_count != len(self.generators):
            path = set(frame.path)
            uf = UnionFind()
            for support in self.supports:
                if path.isdisjoint(support):
                    for x, y in support.items():
                        uf.union(x, y)
            frame.orbits = uf
            frame.orbit_gen_count = len(self.generators)
        uf = frame.orbits
        root = uf[v]
        return any(uf[w] == root for w in frame.explored)

    def run(self) -> CanonicalResult:
        for perm in twin_generators(self.g, self.init):
            self._add_generator(perm)
        seeded = len(self.generators)

        root = self.refiner.initial(self.g, self.init)
        stack: List[_Frame] = []
        abort = self._enter(root, (), True, stack)
        while stack:
            frame = stack[-1]
            if abort:
                abort = False
                if not frame.on_first_path:
                    stack.pop()
                    abort = True
                    continue
            child = None
            while frame.next_index < len(frame.cell):
                v = frame.cell[frame.next_index]
                frame.next_index += 1
                if not self._pruned(frame, v):
                    child = v
                    break
            if child is None:
                stack.pop()
                continue
            frame.explored.append(child)
            part = frame.part.copy()
            start = part.individualize(child)
            self.refiner.refine(part, [start])
            child_first = frame.on_first_path and len(frame.explored) == 1
            abort = self._enter(part, frame.path + (child,), child_first, stack)

        code = self.best_code
        result = CanonicalResult(
            code=CanonicalCode(code=code, hash64=_digest(code)),
            generators=GeneratorSet(n=self.g.n, generators=tuple(self.generators)),
            labeling=self.best_labeling,
            leaves=self.leaves,
        )
        logger.debug("Canonical search finished", nodes=self.g.n, leaves=self.leaves,
                     generators=len(self.generators), seeded_generators=seeded)
        return result

    def _enter(self, part: _OrderedPartition, path: Tuple[int, ...], on_first_path: bool,
               stack: List[_Frame]) -> bool:
        cell = part.target_cell()
        if cell is None:
            return self._leaf(part)
        stack.append(_Frame(part, path, on_first_path, cell))
        return False


def canonical_form(g: Graph, init: Optional[Coloring] = None,
                   node_cap: int = CANONICAL_NODE_CAP) -> CanonicalResult:
    """
    Канонический код и порождающие группы автоморфизмов за один поиск.

    Raises:
        ResourceLimitError: Граф больше лимита node_cap
    """
    init = init if init is not None else Coloring.uniform(g.n)
    _check_coloring(g, init)
    if g.n > node_cap:
        raise ResourceLimitError(
            f"Graph has {g.n} nodes, exact canonicalization is capped at {node_cap}",
            hint="Raise LPL_CANONICAL_NODE_CAP or reduce k",
        )
    return _Search(g, init).run()


def canonical_code(g: Graph, init: Optional[Coloring] = None,
                   node_cap: int = CANONICAL_NODE_CAP) -> CanonicalCode:
    """Код, равный для двух раскрашенных графов тогда и только тогда, когда они изоморфны"""
    return canonical_form(g, init, node_cap).code


def automorphism_generators(g: Graph, init: Optional[Coloring] = None,
                            node_cap: int = CANONICAL_NODE_CAP) -> GeneratorSet:
    """Порождающие группы автоморфизмов, сохраняющих раскраску"""
    return canonical_form(g, init, node_cap).generators


def wl_digest(g: Graph, init: Optional[Coloring] = None) -> CanonicalCode:
    """
    Хеш Weisfeiler–Lehman: инвариант, но не полный (только для профилирования).
    """
    init = init if init is not None else Coloring.uniform(g.n)
    _check_coloring(g, init)
    labels = [f"{c}|{int(v in g.loops)}" for v, c in enumerate(init.color)]
    for _ in range(max(g.n, 1)):
        new = []
        for v in range(g.n):
            outs = ",".join(sorted(labels[u] for u in g.out_adj[v]))
            ins = ",".join(sorted(labels[u] for u in g.in_adj[v])) if g.directed else ""
            raw = f"{labels[v]}({outs})({ins})".encode("utf-8")
            new.append(hashlib.blake2b(raw, digest_size=8).hexdigest())
        stable = len(set(new)) == len(set(labels))
        labels = new
        if stable:
            break
    code = (f"wl:{g.n}:{g.num_edges}:{int(g.directed)}:" + ",".join(sorted(labels))).encode("utf-8")
    return CanonicalCode(code=code, hash64=_digest(code))


def pair_orbits(g: Graph, gens: GeneratorSet, pairs: PairSet) -> np.ndarray:
    """
    Орбиты пар под группой, порождённой gens.

    Замыкание считается как компоненты связности графа "пара -> образ пары"
    по всем порождающим (эквивалент union-find над вселенной пар).

    Returns:
        Массив block_of: номер орбиты для каждой пары (номера по первой паре орбиты)

    Raises:
        InvariantViolationError: Порождающий не автоморфизм или выводит пару из вселенной
    """
    m = len(pairs)
    src_parts = []
    dst_parts = []
    for perm in gens.generators:
        if not is_automorphism(g, perm):
            raise InvariantViolationError("Generator is not an automorphism of the graph")
        support = perm.support()
        if not support:
            continue
        moved = np.fromiter(support.keys(), dtype=np.int64)
        touched = np.nonzero(np.isin(pairs.a, moved) | np.isin(pairs.b, moved))[0]
        if len(touched) == 0:
            continue
        image = perm.as_array()
        targets = pairs.indices_of(image[pairs.a[touched]], image[pairs.b[touched]])
        if np.any(targets < 0):
            raise InvariantViolationError("Generator maps a pair outside the pair universe")
        src_parts.append(touched)
        dst_parts.append(targets)

    if not src_parts:
        return np.arange(m, dtype=np.int64)
    src = np.concatenate(src_parts)
    dst = np.concatenate(dst_parts)
    action = coo_matrix((np.ones(len(src), dtype=np.int32), (src, dst)), shape=(m, m))
    _, labels = connected_components(action, directed=True, connection="weak")
    # перенумерация по первой паре каждой орбиты
    _, first_index, inverse = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first_index))
    return order[inverse].astype(np.int64)
