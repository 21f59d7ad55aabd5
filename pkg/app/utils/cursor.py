"""
Курсорная пагинация списка запусков.

Keyset pagination по id запуска (новые первыми), курсор: base64 от JSON.
"""
import base64
import binascii
import json
from typing import Optional

import structlog
from fastapi import HTTPException, status

logger = structlog.get_logger()


class CursorDecodeError(Exception):
    """Ошибка декодирования курсора"""
    pass


def encode_cursor(run_id: int) -> str:
    """
    Кодирует курсор в base64 строку.

    Args:
        run_id: ID последнего запуска на странице

    Returns:
        Base64 закодированная строка курсора
    """
    json_str = json.dumps({"id": run_id}, separators=(',', ':'))
    encoded = base64.b64encode(json_str.encode('utf-8')).decode('utf-8')
    logger.debug("Cursor encoded", run_id=run_id, encoded=encoded)
    return encoded


def decode_cursor(cursor: str) -> int:
    """
    Декодирует курсор из base64 строки.

    Returns:
        ID запуска, после которого начинается следующая страница

    Raises:
        CursorDecodeError: При ошибке декодирования
    """
    if not cursor:
        raise CursorDecodeError("Cursor cannot be empty")

    try:
        json_str = base64.b64decode(cursor.encode('utf-8'), validate=True).decode('utf-8')
        cursor_data = json.loads(json_str)
    except (binascii.Error, UnicodeDecodeError) as e:
        raise CursorDecodeError(f"Invalid base64 encoding: {e}")
    except json.JSONDecodeError as e:
        raise CursorDecodeError(f"Invalid JSON format: {e}")

    if not isinstance(cursor_data, dict):
        raise CursorDecodeError("Cursor must be a JSON object")
    if "id" not in cursor_data:
        raise CursorDecodeError("Cursor must contain 'id' field")

    run_id = cursor_data["id"]
    if isinstance(run_id, bool) or not isinstance(run_id, int):
        raise CursorDecodeError("ID must be an integer")
    if run_id <= 0:
        raise CursorDecodeError("ID must be positive integer")

    logger.debug("Cursor decoded", run_id=run_id)
    return run_id


def validate_cursor(cursor: Optional[str]) -> Optional[int]:
    """
    Валидирует курсор и возвращает id или None.

    Raises:
        HTTPException: При ошибке валидации курсора
    """
    if cursor is None:
        return None

    try:
        return decode_cursor(cursor)
    except CursorDecodeError as e:
        logger.warning("Invalid cursor provided", cursor=cursor, error=str(e))
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail=f"Invalid cursor format: {e}"
        )
