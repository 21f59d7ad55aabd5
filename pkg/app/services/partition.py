"""
Ячейки не-рёбер: орбиты под Aut(H) (k = ∞) и классы k-hop окрестностей.
"""
import hashlib
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from app.models.canonical import CanonicalCode, Coloring
from app.models.graph import Graph, PairSet
from app.models.metrics import LabeledCells
from app.models.partition import CellPartition, PartitionMode
from app.services.canonical import (
    automorphism_generators,
    canonical_code,
    endpoint_coloring,
    pair_orbits,
    wl_digest,
)
from app.services.graph_core import induced_subgraph, khop_nodes, non_edges
from app.utils.errors import ConsistencyError, InputError

logger = structlog.get_logger()

KHOP_CHUNK_SIZE = 2048


def _representative_key(a: int, b: int) -> str:
    return hashlib.blake2b(f"{a}:{b}".encode("ascii"), digest_size=8).hexdigest()


def global_orbit_partition(h: Graph, pairs: Optional[PairSet] = None) -> CellPartition:
    """
    Орбиты не-рёбер остаточного графа под полной группой автоморфизмов.

    Ячейки нумеруются по представителю (наименьшей паре орбиты в порядке
    вселенной), а не по ключу: орбиты считаются одним процессом, и номер
    ячейки зависит только от h и вселенной пар. Ключ ячейки: хеш
    представителя.
    """
    started = time.time()
    pairs = pairs if pairs is not None else non_edges(h)
    gens = automorphism_generators(h, Coloring.uniform(h.n))
    block_of = pair_orbits(h, gens, pairs)
    _, first = np.unique(block_of, return_index=True)
    keys = tuple(_representative_key(int(pairs.a[i]), int(pairs.b[i])) for i in first)

    part = CellPartition(pairs=pairs, block_of=block_of, keys=keys, mode=PartitionMode.GLOBAL)
    logger.info("Global orbit partition built", nodes=h.n, pairs=len(pairs),
                blocks=part.num_blocks, generators=len(gens),
                elapsed_ms=int((time.time() - started) * 1000))
    return part


def khop_code(h: Graph, a: int, b: int, k: int, respect_direction: bool = False,
              approx_wl: bool = False) -> CanonicalCode:
    """Код k-hop окрестности пары (a, b) с выделенными концами"""
    nodes = khop_nodes(h, h.pair(a, b), k, respect_direction)
    sub, mapping = induced_subgraph(h, nodes)
    local = {v: i for i, v in enumerate(mapping)}
    coloring = endpoint_coloring(sub.n, local[a], local[b], h.directed)
    if approx_wl:
        return wl_digest(sub, coloring)
    return canonical_code(sub, coloring)


def _khop_chunk(h: Graph, chunk: Sequence[Tuple[int, int]], k: int,
                respect_direction: bool, approx_wl: bool) -> List[CanonicalCode]:
    return [khop_code(h, a, b, k, respect_direction, approx_wl) for a, b in chunk]


def khop_partition(
    h: Graph,
    k: int,
    pairs: Optional[PairSet] = None,
    respect_direction: bool = False,
    approx_wl: bool = False,
    workers: int = 1,
) -> CellPartition:
    """
    Классы не-рёбер по каноническому коду их k-hop окрестности.

    Коды группируются по 64-битному хешу, равенство подтверждается полным
    кодом. Ячейки упорядочены по байтам кода, поэтому результат не зависит
    от числа процессов.

    Args:
        h: Остаточный граф
        k: Число шагов (>= 1)
        pairs: Вселенная пар (по умолчанию все не-рёбра h)
        respect_direction: Обходить только исходящие рёбра
        approx_wl: Хеш WL вместо точного кода (только профилирование)
        workers: Число процессов
    """
    if k < 1:
        raise InputError(f"Hop count must be at least 1, got {k}")
    started = time.time()
    pairs = pairs if pairs is not None else non_edges(h)
    items = list(zip(pairs.a.tolist(), pairs.b.tolist()))

    if workers > 1 and len(items) > KHOP_CHUNK_SIZE:
        chunks = [items[i:i + KHOP_CHUNK_SIZE] for i in range(0, len(items), KHOP_CHUNK_SIZE)]
        codes: List[CanonicalCode] = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_khop_chunk, h, chunk, k, respect_direction, approx_wl)
                       for chunk in chunks]
            for future in futures:
                codes.extend(future.result())
    else:
        codes = _khop_chunk(h, items, k, respect_direction, approx_wl)

    # словарь хеширует по hash64 и сравнивает полный код
    members: Dict[CanonicalCode, List[int]] = {}
    for i, code in enumerate(codes):
        members.setdefault(code, []).append(i)
    ordered = sorted(members)
    block_of = np.empty(len(items), dtype=np.int64)
    for block, code in enumerate(ordered):
        block_of[members[code]] = block

    part = CellPartition(
        pairs=pairs,
        block_of=block_of,
        keys=tuple(code.hex for code in ordered),
        mode=PartitionMode.KHOP,
        k=k,
    )
    logger.info("K-hop partition built", k=k, pairs=len(pairs), blocks=part.num_blocks,
                workers=workers, approx_wl=approx_wl,
                elapsed_ms=int((time.time() - started) * 1000))
    return part


def label_cells(part: CellPartition, positives: Iterable[Tuple[int, int]]) -> LabeledCells:
    """
    Считает позитивы и негативы в каждой ячейке (порядок ячеек сохраняется).

    Raises:
        ConsistencyError: Позитив не входит во вселенную пар разбиения
    """
    pos = list(positives)
    if pos:
        arr = np.asarray([(p[0], p[1]) for p in pos], dtype=np.int64)
        idx = part.pairs.indices_of(arr[:, 0], arr[:, 1])
        missing = np.nonzero(idx < 0)[0]
        if len(missing):
            a, b = arr[missing[0]]
            raise ConsistencyError(f"Positive pair ({a}, {b}) is not in the pair universe")
        idx = np.unique(idx)
        p = np.bincount(part.block_of[idx], minlength=part.num_blocks)
    else:
        p = np.zeros(part.num_blocks, dtype=np.int64)
    n = part.block_sizes() - p
    return LabeledCells(p, n)


def partition_rows(part: CellPartition, g: Graph) -> Iterator[Tuple[str, str, str]]:
    """Строки дампа (pair_a, pair_b, block_key_hex) во внешних метках графа"""
    for a, b, block in zip(part.pairs.a.tolist(), part.pairs.b.tolist(), part.block_of.tolist()):
        yield g.label_of(a), g.label_of(b), part.keys[block]


def is_refinement(finer: CellPartition, coarser: CellPartition) -> bool:
    """Каждая ячейка finer целиком лежит в одной ячейке coarser"""
    if not np.array_equal(finer.pairs.keys, coarser.pairs.keys):
        return False
    if len(finer.block_of) == 0:
        return True
    links = np.unique(np.stack([finer.block_of, coarser.block_of], axis=1), axis=0)
    return len(links) == finer.num_blocks
