from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from app import __version__
from app.database.connection import create_tables
from app.middleware.logging import LoggingMiddleware
from app.api import health, metrics, orbits, runs
from app.utils.errors import BoundsError
from app.utils.logging_config import configure_logging
import structlog

configure_logging()
logger = structlog.get_logger()

app = FastAPI(
    title="Link Prediction Limits",
    description="Верхние границы ROC / AUPR / AP для предсказания рёбер по одной топологии",
    version=__version__,
    docs_url="/docs",
    redoc_url="/redoc",
    openapi_url="/openapi.json"
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.add_middleware(LoggingMiddleware)

app.include_router(health.router, tags=["health"])
app.include_router(metrics.router, prefix="/api/v1", tags=["metrics"])
app.include_router(orbits.router, prefix="/api/v1", tags=["orbits"])
app.include_router(runs.router, prefix="/api/v1", tags=["runs"])


@app.exception_handler(BoundsError)
async def bounds_error_handler(request: Request, exc: BoundsError):
    """Ошибки расчёта в формате {detail, error_code, hint}"""
    logger.warning("Request failed", path=request.url.path, error_code=exc.error_code.value,
                   error=exc.message)
    return JSONResponse(status_code=exc.http_status, content=exc.to_dict())


@app.on_event("startup")
async def startup_event():
    """Инициализация при запуске"""
    logger.info("Starting Link Prediction Limits service", version=__version__)
    create_tables()
    logger.info("Database tables created")


@app.on_event("shutdown")
async def shutdown_event():
    """Очистка при завершении"""
    logger.info("Shutting down Link Prediction Limits service")


@app.get("/")
async def root():
    """Корневой эндпоинт"""
    return {
        "message": "Link Prediction Limits",
        "version": __version__,
        "docs": "/docs"
    }
