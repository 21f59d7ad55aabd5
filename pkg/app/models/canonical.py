from dataclasses import dataclass, field
from typing import List, Tuple

from app.models.graph import Permutation
from app.utils.errors import InputError


@dataclass(frozen=True)
class Coloring:
    """Раскраска вершин: классы: непрерывные целые 0..c-1, каждый непуст"""
    color: Tuple[int, ...]

    def __post_init__(self):
        if self.color and set(self.color) != set(range(max(self.color) + 1)):
            raise InputError("Coloring classes must be contiguous integers 0..c-1")

    @classmethod
    def uniform(cls, n: int) -> "Coloring":
        return cls(tuple([0] * n))

    @classmethod
    def from_keys(cls, keys) -> "Coloring":
        """Сжимает произвольные сравнимые ключи в непрерывные цвета по возрастанию ключа"""
        rank = {key: i for i, key in enumerate(sorted(set(keys)))}
        return cls(tuple(rank[key] for key in keys))

    @property
    def n(self) -> int:
        return len(self.color)

    @property
    def num_colors(self) -> int:
        return max(self.color) + 1 if self.color else 0

    def classes(self) -> List[List[int]]:
        out: List[List[int]] = [[] for _ in range(self.num_colors)]
        for v, c in enumerate(self.color):
            out[c].append(v)
        return out

    def is_discrete(self) -> bool:
        return self.num_colors == self.n

    def permuted(self, pi: Permutation) -> "Coloring":
        """Раскраска, согласованная с перестановкой: color'[π(v)] = color[v]"""
        out = [0] * self.n
        for v, c in enumerate(self.color):
            out[pi(v)] = c
        return Coloring(tuple(out))


@dataclass(frozen=True)
class CanonicalCode:
    """
    Канонический код раскрашенного графа.

    Равенство и порядок определяются полным кодом; hash64: только индекс
    для группировки по корзинам.
    """
    code: bytes
    hash64: int = field(compare=False)

    def __eq__(self, other) -> bool:
        return isinstance(other, CanonicalCode) and self.code == other.code

    def __lt__(self, other: "CanonicalCode") -> bool:
        return self.code < other.code

    def __hash__(self) -> int:
        return self.hash64

    @property
    def hex(self) -> str:
        return f"{self.hash64:016x}"


@dataclass(frozen=True)
class GeneratorSet:
    """Порождающие группы автоморфизмов"""
    n: int
    generators: Tuple[Permutation, ...]

    def __len__(self) -> int:
        return len(self.generators)


@dataclass(frozen=True)
class CanonicalResult:
    """Результат одного поиска: код, порождающие и канонизирующая разметка"""
    code: CanonicalCode
    generators: GeneratorSet
    labeling: Tuple[int, ...]
    leaves: int
