from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.utils.errors import InputError

# Интерполяция PR-кривой между базовыми точками: смесь классификаторов
PR_INTERPOLATION = "hyperbolic (classifier mixture)"


@dataclass(frozen=True)
class LabeledCells:
    """Ячейки с числом позитивов p и негативов n; t = p + n >= 1"""
    p: np.ndarray
    n: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.int64)
        n = np.asarray(self.n, dtype=np.int64)
        if p.shape != n.shape or p.ndim != 1:
            raise InputError("Cells need matching one-dimensional p and n arrays")
        if np.any(p < 0) or np.any(n < 0):
            raise InputError("Cell counts must be non-negative")
        if np.any(p + n < 1):
            raise InputError("Every cell must contain at least one pair")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "n", n)

    @classmethod
    def from_pairs(cls, cells: Iterable[Tuple[int, int]]) -> "LabeledCells":
        rows = list(cells)
        if not rows:
            return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
        arr = np.asarray(rows, dtype=np.int64).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    @property
    def t(self) -> np.ndarray:
        return self.p + self.n

    @property
    def positives(self) -> int:
        return int(self.p.sum())

    @property
    def negatives(self) -> int:
        return int(self.n.sum())

    def __len__(self) -> int:
        return len(self.p)

    def as_tuples(self) -> List[Tuple[int, int]]:
        return list(zip(self.p.tolist(), self.n.tolist()))


@dataclass(frozen=True)
class OrderedCells:
    """
    Ячейки по убыванию плотности позитивов p/t, равные плотности слиты.

    Кумулятивные суммы хранятся как python int: cum_p[i] = P_i, где
    cum_p[0] = 0 и cum_p[-1] = P.
    """
    cells: LabeledCells
    cum_p: Tuple[int, ...]
    cum_n: Tuple[int, ...]

    @property
    def P(self) -> int:
        return self.cum_p[-1]

    @property
    def N(self) -> int:
        return self.cum_n[-1]

    @property
    def T(self) -> int:
        return self.P + self.N

    def cum_t(self, i: int) -> int:
        return self.cum_p[i] + self.cum_n[i]

    def __len__(self) -> int:
        return len(self.cells)


class ApBound(NamedTuple):
    """Верхняя граница AP и AP при сортированном порядке (нижний свидетель)"""
    bound: float
    sorted_ap: float


class BoundReport(BaseModel):
    """Максимальные метрики для набора ячеек"""
    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "defined": True,
                "max_roc": 0.63333333333333333,
                "max_aupr": 0.47442678466271046,
                "max_ap": 0.47442678466271046,
                "ap_sorted": 0.45833333333333333,
                "positives": 3,
                "negatives": 5,
                "cells": 2,
                "roc_points": [[0.0, 0.0], [0.4, 0.66666666666666667], [1.0, 1.0]],
                "pr_points": [[0.0, 0.5], [0.66666666666666667, 0.5], [1.0, 0.375]],
                "interpolation": PR_INTERPOLATION,
            }
        }
    )

    defined: bool = Field(description="False, если P=0 или N=0")
    reason: Optional[str] = Field(default=None, description="Причина неопределённости")
    max_roc: Optional[float] = Field(default=None, ge=0.0, le=1.0, description="Максимальный ROC AUC")
    max_aupr: Optional[float] = Field(default=None, ge=0.0, le=1.0, description="Максимальный AUPR")
    max_ap: Optional[float] = Field(default=None, ge=0.0, le=1.0, description="Верхняя граница AP")
    ap_sorted: Optional[float] = Field(default=None, ge=0.0, le=1.0, description="AP при сортировке по плотности")
    positives: int = Field(description="Число позитивов P")
    negatives: int = Field(description="Число негативов N")
    cells: int = Field(description="Число ячеек после слияния равных плотностей")
    roc_points: List[Tuple[float, float]] = Field(default_factory=list, description="Базовые точки ROC (FPR, TPR)")
    pr_points: List[Tuple[float, float]] = Field(default_factory=list, description="Базовые точки PR (recall, precision)")
    interpolation: str = Field(default=PR_INTERPOLATION, description="Интерполяция PR-кривой")


class CellIn(BaseModel):
    """Ячейка во входном запросе"""
    p: int = Field(ge=0, description="Позитивы в ячейке")
    n: int = Field(ge=0, description="Негативы в ячейке")


class MetricsRequest(BaseModel):
    """Запрос расчёта границ по готовым ячейкам"""
    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "cells": [{"p": 10, "n": 0}, {"p": 2, "n": 2}, {"p": 9, "n": 7}],
                "downsample": None,
                "seed": 0,
            }
        }
    )

    cells: List[CellIn] = Field(min_length=1, description="Ячейки в заданном порядке")
    downsample: Optional[float] = Field(default=None, gt=0.0, description="Позитивов на негатив")
    seed: int = Field(default=0, ge=0, description="Seed прореживания")

    def labeled(self) -> LabeledCells:
        return LabeledCells.from_pairs((c.p, c.n) for c in self.cells)


class MetricsResponse(BaseModel):
    """Границы и AP в исходном порядке ячеек"""
    report: BoundReport
    listed_order_ap: Optional[float] = Field(default=None, description="AP в порядке запроса")
