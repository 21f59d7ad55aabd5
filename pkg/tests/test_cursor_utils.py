"""
Unit тесты для утилит курсорной пагинации.
"""
import base64
import json

import pytest
from fastapi import HTTPException

from app.utils.cursor import CursorDecodeError, decode_cursor, encode_cursor, validate_cursor


def raw_cursor(data) -> str:
    return base64.b64encode(json.dumps(data).encode("utf-8")).decode("utf-8")


class TestEncodeCursor:
    """Тесты кодирования курсора"""

    def test_encode_cursor_basic(self):
        """Тест базового кодирования курсора"""
        cursor = encode_cursor(123)

        # Декодируем для проверки
        data = json.loads(base64.b64decode(cursor).decode("utf-8"))
        assert data == {"id": 123}

    def test_round_trip_large_id(self):
        """Тест полного цикла с большим ID"""
        assert decode_cursor(encode_cursor(999999999)) == 999999999


class TestDecodeCursor:
    """Тесты декодирования курсора"""

    def test_decode_cursor_basic(self):
        """Тест базового декодирования курсора"""
        assert decode_cursor(raw_cursor({"id": 42})) == 42

    def test_decode_cursor_empty_string(self):
        """Тест декодирования пустой строки"""
        with pytest.raises(CursorDecodeError, match="Cursor cannot be empty"):
            decode_cursor("")

    def test_decode_cursor_none(self):
        """Тест декодирования None"""
        with pytest.raises(CursorDecodeError, match="Cursor cannot be empty"):
            decode_cursor(None)

    def test_decode_cursor_invalid_base64(self):
        """Тест декодирования невалидного base64"""
        with pytest.raises(CursorDecodeError, match="Invalid base64 encoding"):
            decode_cursor("invalid-base64!")

    def test_decode_cursor_invalid_json(self):
        """Тест декодирования невалидного JSON"""
        invalid_json = base64.b64encode("invalid json".encode("utf-8")).decode("utf-8")
        with pytest.raises(CursorDecodeError, match="Invalid JSON format"):
            decode_cursor(invalid_json)

    def test_decode_cursor_not_dict(self):
        """Тест декодирования курсора с не-объектом JSON"""
        with pytest.raises(CursorDecodeError, match="Cursor must be a JSON object"):
            decode_cursor(raw_cursor("not-a-dict"))

    def test_decode_cursor_missing_id(self):
        """Тест курсора без поля id"""
        with pytest.raises(CursorDecodeError, match="Cursor must contain 'id' field"):
            decode_cursor(raw_cursor({"created_at": "2024-01-15T10:30:00Z"}))

    @pytest.mark.parametrize("value", ["123", 1.5, True, None])
    def test_decode_cursor_invalid_id(self, value):
        """Тест курсора с нецелым ID"""
        with pytest.raises(CursorDecodeError, match="ID must be an integer"):
            decode_cursor(raw_cursor({"id": value}))

    @pytest.mark.parametrize("value", [0, -1])
    def test_decode_cursor_non_positive_id(self, value):
        """Тест курсора с неположительным ID"""
        with pytest.raises(CursorDecodeError, match="ID must be positive integer"):
            decode_cursor(raw_cursor({"id": value}))


class TestValidateCursor:
    """Тесты валидации курсора"""

    def test_validate_cursor_none(self):
        """Тест валидации None курсора"""
        assert validate_cursor(None) is None

    def test_validate_cursor_valid(self):
        """Тест валидации валидного курсора"""
        assert validate_cursor(encode_cursor(7)) == 7

    def test_validate_cursor_invalid(self):
        """Тест валидации невалидного курсора"""
        with pytest.raises(HTTPException) as exc_info:
            validate_cursor("invalid-cursor")

        assert exc_info.value.status_code == 400
        assert "Invalid cursor format" in exc_info.value.detail
