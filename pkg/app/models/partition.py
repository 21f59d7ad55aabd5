from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from app.models.graph import PairSet
from app.utils.errors import InvariantViolationError


class PartitionMode(str, Enum):
    """Режим построения ячеек"""
    GLOBAL = "global"
    KHOP = "khop"


@dataclass(frozen=True)
class CellPartition:
    """
    Разбиение не-рёбер на ячейки.

    block_of[i]: номер ячейки пары pairs[i]; ячейки пронумерованы 0..B-1
    в порядке ключей. keys[b]: hex-ключ ячейки (канонический код в режиме
    khop, код представителя орбиты в режиме global).
    """
    pairs: PairSet
    block_of: np.ndarray
    keys: Tuple[str, ...]
    mode: PartitionMode
    k: Optional[int] = None

    def __post_init__(self):
        if len(self.block_of) != len(self.pairs):
            raise InvariantViolationError("Every pair must be assigned to exactly one block")
        if len(self.block_of):
            used = np.unique(self.block_of)
            if used[0] != 0 or used[-1] != len(self.keys) - 1 or len(used) != len(self.keys):
                raise InvariantViolationError("Block ids must be contiguous and non-empty")
        elif self.keys:
            raise InvariantViolationError("Empty pair set cannot have blocks")

    @property
    def num_blocks(self) -> int:
        return len(self.keys)

    @property
    def blocks(self) -> List[np.ndarray]:
        """Индексы пар каждой ячейки, по возрастанию"""
        order = np.argsort(self.block_of, kind="stable")
        bounds = np.cumsum(np.bincount(self.block_of, minlength=self.num_blocks))
        return np.split(order, bounds[:-1]) if self.num_blocks else []

    def block_sizes(self) -> np.ndarray:
        return np.bincount(self.block_of, minlength=self.num_blocks)

    @property
    def label(self) -> str:
        return "global" if self.mode == PartitionMode.GLOBAL else f"k={self.k}"
