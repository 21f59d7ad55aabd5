from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field
from sqlalchemy import Column, DateTime, Integer, String, Text
from sqlalchemy.sql import func

from app.database.connection import Base
from app.models.experiment import ExperimentConfig

# Размер страницы списка запусков
RUNS_PAGE_DEFAULT = 20
RUNS_PAGE_MAX = 100

# Максимальный размер списка рёбер, принимаемого через API
EDGE_LIST_MAX_BYTES = 10 * 1024 * 1024


class RunStatus(str, Enum):
    """Статус сохранённого запуска"""
    COMPLETED = "completed"
    FAILED = "failed"


class BoundRun(Base):
    """SQLAlchemy модель запуска расчёта границ"""
    __tablename__ = "bound_runs"

    id = Column(Integer, primary_key=True, index=True, autoincrement=True)
    graph_name = Column(String(255), nullable=False)
    graph_digest = Column(String(64), index=True, nullable=False)
    status = Column(String(20), nullable=False)
    config_json = Column(Text, nullable=False)
    summary_json = Column(Text, nullable=True)
    manifest_json = Column(Text, nullable=True)
    error_json = Column(Text, nullable=True)
    created_at = Column(DateTime(timezone=True), server_default=func.now(), nullable=False)


class RunManifest(BaseModel):
    """Происхождение отчёта: версия, граф, конфигурация и время по стадиям"""
    tool_version: str
    graph_sha256: str
    graph_name: str
    config: Dict[str, Any]
    started_at: str = Field(description="Время запуска (ISO 8601, UTC)")
    wall_clock_ms: int
    timings_ms: Dict[str, int] = Field(default_factory=dict, description="Суммарное время стадий по испытаниям")
    workers: int = 1


class RunCreate(BaseModel):
    """Запрос на расчёт границ по списку рёбер"""
    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "graph_name": "kite",
                "edge_list": "c f\nf d\nd c\nd a\nd b\nd e\ne b\n",
                "config": {"removal_prob": 0.1, "trials": 3, "master_seed": 7, "k_max": 2},
            }
        }
    )

    graph_name: str = Field(min_length=1, max_length=255, description="Имя графа")
    edge_list: str = Field(min_length=1, description="Список рёбер в текстовом формате")
    config: ExperimentConfig = Field(default_factory=ExperimentConfig)
    reported: Optional[Dict[str, float]] = Field(
        default=None, description="Опубликованные метрики предиктора для сравнения с границами")


class RunResponse(BaseModel):
    """Сохранённый запуск"""
    id: int
    graph_name: str
    graph_digest: str
    status: RunStatus
    config: Dict[str, Any]
    summary: Optional[Dict[str, Any]] = None
    manifest: Optional[Dict[str, Any]] = None
    error: Optional[Dict[str, Any]] = None
    created_at: datetime


class RunListResponse(BaseModel):
    """Страница списка запусков"""
    runs: List[RunResponse]
    next_cursor: Optional[str] = Field(default=None, description="Курсор для следующей страницы")
    has_more: bool = Field(description="Есть ли еще страницы")
