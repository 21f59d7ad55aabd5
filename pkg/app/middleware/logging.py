import structlog
import uuid
import time
from fastapi import Request, Response
from starlette.middleware.base import BaseHTTPMiddleware
from typing import Callable, Any
from app.utils.cursor import CursorDecodeError, decode_cursor

logger = structlog.get_logger()

RUNS_PATH = "/api/v1/runs"


class LoggingMiddleware(BaseHTTPMiddleware):
    """Middleware для логирования запросов с correlation-id"""

    async def dispatch(self, request: Request, call_next: Callable) -> Response:
        correlation_id = request.headers.get("x-correlation-id", str(uuid.uuid4()))
        request_id = request.headers.get("x-request-id", str(uuid.uuid4()))

        log = logger.bind(
            correlation_id=correlation_id,
            request_id=request_id,
            method=request.method,
            url=str(request.url),
            client_ip=request.client.host if request.client else None
        )

        start_time = time.time()
        log.info("Request started")

        response = await call_next(request)
        response.headers["x-correlation-id"] = correlation_id
        response.headers["x-request-id"] = request_id

        process_time = time.time() - start_time

        # Метрики запусков расчёта границ
        extra_metrics = {}
        if request.url.path == RUNS_PATH:
            extra_metrics.update(self._get_runs_metrics(request, response, process_time))

        log.info(
            "Request completed",
            status_code=response.status_code,
            process_time=process_time,
            **extra_metrics
        )

        return response

    def _get_runs_metrics(self, request: Request, response: Response, process_time: float) -> dict[str, Any]:
        """Метрики создания и листинга запусков"""
        latency = round(process_time * 1000, 2)
        if request.method == "POST":
            return {
                "api.runs.create.latency_ms": latency,
                "api.runs.create.failed": int(response.status_code >= 400),
            }

        metrics: dict[str, Any] = {"api.runs.list.latency_ms": latency}
        limit = request.query_params.get("limit")
        cursor = request.query_params.get("cursor")
        if limit:
            try:
                metrics["api.runs.list.limit"] = int(limit)
            except ValueError:
                pass
        if cursor:
            try:
                decode_cursor(cursor)
                metrics["api.runs.list.pages_depth"] = "deep"
            except CursorDecodeError:
                metrics["api.runs.list.cursor_errors"] = 1
        else:
            metrics["api.runs.list.pages_depth"] = "first"
        return metrics
