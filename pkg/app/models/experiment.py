import os
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.models.metrics import BoundReport

# Параметры эксперимента по умолчанию
DEFAULT_REMOVAL_PROB = 0.1
DEFAULT_TRIALS = 10
DEFAULT_K_MAX = 8
DEFAULT_STOP_EPSILON = 0.005
DEFAULT_MAX_REDRAWS = 100
DEFAULT_WORKERS = int(os.getenv("LPL_WORKERS", "1"))
SEED_LIMIT = 2 ** 64

# z для нормального 95% доверительного интервала
CI_Z = 1.96

# Допуск проверки монотонности границ по k
MONOTONE_TOLERANCE = 1e-12


class ExperimentConfig(BaseModel):
    """Параметры процедуры: удаление рёбер, уровни k, критерий остановки"""
    model_config = ConfigDict(
        extra="forbid",
        json_schema_extra={
            "example": {
                "removal_prob": 0.1,
                "trials": 10,
                "master_seed": 7,
                "k_max": 6,
                "stop_epsilon": 0.005,
                "downsample": 1.0,
                "directed": True,
            }
        },
    )

    removal_prob: float = Field(default=DEFAULT_REMOVAL_PROB, gt=0.0, lt=1.0,
                                description="Вероятность удаления каждого ребра")
    trials: int = Field(default=DEFAULT_TRIALS, ge=1, description="Число испытаний")
    master_seed: int = Field(default=0, ge=0, lt=SEED_LIMIT, description="Главный seed (64 бита)")
    k_max: int = Field(default=DEFAULT_K_MAX, ge=0, description="Максимальное k; 0: только глобальная граница")
    stop_epsilon: float = Field(default=DEFAULT_STOP_EPSILON, ge=0.0,
                                description="Остановка, когда AUPR_k в пределах eps от глобальной")
    downsample: Optional[float] = Field(default=None, gt=0.0,
                                        description="Позитивов на негатив при прореживании (1.0: 1:1)")
    directed: bool = Field(default=False, description="Ориентированный граф")
    include_self_loops: bool = Field(default=False, description="Петли входят во вселенную не-рёбер")
    respect_direction: bool = Field(default=False, description="k-hop только по исходящим рёбрам")
    approx_wl: bool = Field(default=False, description="Хеш WL вместо точного кода (профилирование)")
    max_redraws: int = Field(default=DEFAULT_MAX_REDRAWS, ge=0,
                             description="Перевыборы вырожденного испытания")


class LevelBounds(BaseModel):
    """Границы одного уровня (k или глобальный) в одном испытании"""
    k: Optional[int] = Field(default=None, description="k; None: глобальные орбиты")
    blocks: int = Field(description="Число ячеек разбиения")
    report: BoundReport
    downsampled: Optional[BoundReport] = Field(default=None, description="Границы после прореживания")


class TrialResult(BaseModel):
    """Результат одного испытания"""
    trial: int
    positives: int
    negatives: int
    redraws: int = Field(description="Число перевыборов вырожденного удаления")
    global_bounds: LevelBounds
    per_k: List[LevelBounds] = Field(default_factory=list)
    k_stop: Optional[int] = Field(default=None, description="k, на котором сработал критерий остановки")
    monotone: bool = Field(default=True, description="Границы не убывают по k")
    downsample_dominates: Optional[bool] = Field(
        default=None, description="Граница после прореживания не ниже полной на всех уровнях; None без прореживания")
    timings_ms: Dict[str, int] = Field(default_factory=dict, exclude=True)


class MetricSummary(BaseModel):
    """Среднее и полуширина 95% ДИ по испытаниям"""
    mean: Optional[float] = None
    ci_halfwidth: float = Field(default=0.0, ge=0.0)
    width_defined: bool = Field(default=False, description="False при одном значении")
    count: int = 0
    samples: List[float] = Field(default_factory=list)


class LevelSummary(BaseModel):
    """Сводка одного уровня по испытаниям"""
    k: Optional[int] = None
    trials: List[int] = Field(default_factory=list, description="Испытания с определёнными границами")
    roc: MetricSummary
    aupr: MetricSummary
    ap_bound: MetricSummary
    ap_sorted: MetricSummary
    downsampled_ap_bound: Optional[MetricSummary] = None
    undefined: int = Field(default=0, description="Испытания, где граница не определена")


class BoundSummary(BaseModel):
    """Агрегат по всем испытаниям"""
    model_config = ConfigDict(populate_by_name=True)

    trials: int
    redraws: int
    k_stops: List[Optional[int]] = Field(default_factory=list)
    per_k: List[LevelSummary] = Field(default_factory=list)
    global_: LevelSummary = Field(alias="global")
    trial_results: List[TrialResult] = Field(default_factory=list, exclude=True)


class Verdict(str, Enum):
    """Сравнение опубликованного значения с границей"""
    BELOW_BOUND = "below_bound"
    ABOVE_BOUND = "above_bound"


class ReportedComparison(BaseModel):
    """Опубликованная метрика против верхней границы"""
    metric: str
    reported: float
    bound_mean: float
    bound_ci: float
    verdict: Verdict
    note: Optional[str] = None
