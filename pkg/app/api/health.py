from fastapi import APIRouter, Depends
from sqlalchemy.orm import Session
from app import __version__
from app.database.connection import get_db, ping
import structlog

logger = structlog.get_logger()
router = APIRouter()

SERVICE_NAME = "link-prediction-limits"


@router.get("/healthz")
async def health_check():
    """
    Liveness probe: сервис запущен и отвечает
    """
    logger.info("Health check requested")
    return {"status": "healthy", "service": SERVICE_NAME, "version": __version__}


@router.get("/readyz")
async def readiness_check(db: Session = Depends(get_db)):
    """
    Readiness probe: реестр запусков доступен
    """
    try:
        ping(db)
        logger.info("Readiness check passed")
        return {"status": "ready", "service": SERVICE_NAME}
    except Exception as e:
        logger.error("Readiness check failed", error=str(e))
        return {"status": "not ready", "service": SERVICE_NAME, "error": str(e)}
