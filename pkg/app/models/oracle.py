from enum import Enum
from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field

# Бюджеты переборных проверок по умолчанию
ORACLE_MAX_NODES = 8
ORACLE_MAX_CELLS = 8
ORACLE_TOLERANCE = 1e-9


class OracleMetric(str, Enum):
    """Метрика для перебора порядков ячеек"""
    ROC = "roc"
    AUPR = "aupr"
    AP = "ap"


class OracleBudget(BaseModel):
    """Ограничения переборного оракула"""
    model_config = ConfigDict(frozen=True)

    max_nodes: int = Field(default=ORACLE_MAX_NODES, gt=0, description="Вершин для перебора перестановок")
    max_cells: int = Field(default=ORACLE_MAX_CELLS, gt=0, description="Ячеек для перебора порядков")
    tolerance: float = Field(default=ORACLE_TOLERANCE, gt=0.0, description="Допуск численного интегрирования")


class OrderingResult(BaseModel):
    """Лучший порядок ячеек для метрики"""
    metric: OracleMetric
    best_value: float
    best_order: List[Tuple[int, int]] = Field(description="Ячейки (p, n) в лучшем порядке")
    sorted_value: float = Field(description="Значение при сортировке по плотности")
    sorted_is_optimal: bool = Field(description="Сортировка по плотности достигает максимума")
    orderings: int = Field(description="Число перебранных порядков")


class OrderingsRequest(BaseModel):
    """Запрос перебора порядков ячеек"""
    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "cells": [[10, 0], [2, 2], [9, 7]],
                "metric": "ap",
            }
        }
    )

    cells: List[Tuple[int, int]] = Field(min_length=1, description="Ячейки (p, n)")
    metric: OracleMetric = Field(default=OracleMetric.AP)
