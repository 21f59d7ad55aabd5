from typing import Optional

from fastapi import APIRouter, Depends, HTTPException, Query, status
from sqlalchemy.orm import Session
import structlog

from app.database.connection import get_db
from app.models.experiment import DEFAULT_WORKERS
from app.models.run import RUNS_PAGE_DEFAULT, RUNS_PAGE_MAX, RunCreate, RunListResponse, RunResponse
from app.services.run_service import RunService, to_response
from app.utils.cursor import encode_cursor, validate_cursor

logger = structlog.get_logger()
router = APIRouter()


@router.post(
    "/runs",
    response_model=RunResponse,
    status_code=status.HTTP_201_CREATED,
    responses={
        400: {"description": "Unparseable edge list"},
        413: {"description": "Graph above the canonicalization cap"},
        422: {"description": "Invalid config or degenerate trial"},
    },
)
def create_run(request: RunCreate, db: Session = Depends(get_db)):
    """
    Расчёт границ по списку рёбер с сохранением в реестр.

    Расчёт синхронный: ответ содержит сводку по всем испытаниям и манифест.
    Неуспешный расчёт тоже сохраняется со статусом failed.
    """
    logger.info("Creating run", graph_name=request.graph_name, trials=request.config.trials)
    run = RunService(db, DEFAULT_WORKERS).create_run(request)
    return to_response(run)


@router.get("/runs/{run_id}", response_model=RunResponse)
async def get_run(run_id: int, db: Session = Depends(get_db)):
    """
    Получение запуска по ID
    """
    run = RunService(db).get_run(run_id)
    if not run:
        logger.warning("Run not found", run_id=run_id)
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=f"Run with ID {run_id} not found"
        )
    return to_response(run)


@router.get("/runs", response_model=RunListResponse)
async def list_runs(
    limit: int = Query(default=RUNS_PAGE_DEFAULT, ge=1, le=RUNS_PAGE_MAX, description="Количество запусков на странице"),
    cursor: Optional[str] = Query(default=None, description="Курсор для пагинации"),
    db: Session = Depends(get_db),
):
    """
    Список запусков, новые первыми (keyset pagination по id)
    """
    after_id = validate_cursor(cursor)
    runs, has_more = RunService(db).list_runs(limit, after_id)
    next_cursor = encode_cursor(runs[-1].id) if has_more and runs else None
    logger.info("Runs listed", runs_count=len(runs), has_more=has_more, next_cursor=next_cursor)
    return RunListResponse(
        runs=[to_response(run) for run in runs],
        next_cursor=next_cursor,
        has_more=has_more,
    )
