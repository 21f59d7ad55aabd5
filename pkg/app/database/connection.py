"""
Подключение к базе данных реестра запусков.

URL берётся из DATABASE_URL; по умолчанию локальный SQLite файл.
"""
import os
from contextlib import contextmanager
from typing import Iterator

import structlog
from sqlalchemy import create_engine, text
from sqlalchemy.orm import Session, declarative_base, sessionmaker

logger = structlog.get_logger()

SQLALCHEMY_DATABASE_URL = os.getenv("DATABASE_URL", "sqlite:///./link_limits.db")

engine = create_engine(
    SQLALCHEMY_DATABASE_URL,
    connect_args={"check_same_thread": False} if SQLALCHEMY_DATABASE_URL.startswith("sqlite") else {}
)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

Base = declarative_base()


def get_db() -> Iterator[Session]:
    """Dependency для получения сессии базы данных"""
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()


@contextmanager
def session_scope() -> Iterator[Session]:
    """Сессия для CLI: commit при успехе, rollback при ошибке"""
    db = SessionLocal()
    try:
        yield db
        db.commit()
    except Exception:
        db.rollback()
        raise
    finally:
        db.close()


def create_tables() -> None:
    """Создание таблиц реестра запусков"""
    # регистрация моделей в Base.metadata
    from app.models import run  # noqa: F401
    Base.metadata.create_all(bind=engine)
    logger.debug("Database tables ensured", url=SQLALCHEMY_DATABASE_URL)


def ping(db: Session) -> None:
    """Проверка доступности БД; бросает исключение драйвера при сбое"""
    db.execute(text("SELECT 1"))
