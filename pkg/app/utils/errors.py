"""
Ошибки предметной области.

Каждая ошибка несёт код (ErrorCode), код выхода CLI и HTTP статус,
чтобы CLI и API отображали их одинаково.
"""
from enum import Enum
from typing import Optional


class ErrorCode(str, Enum):
    """Коды ошибок расчёта границ"""
    PARSE_ERROR = "PARSE_ERROR"
    EMPTY_GRAPH = "EMPTY_GRAPH"
    INVALID_INPUT = "INVALID_INPUT"
    RESOURCE_LIMIT = "RESOURCE_LIMIT"
    ORACLE_BUDGET = "ORACLE_BUDGET"
    DEGENERATE_METRIC = "DEGENERATE_METRIC"
    DEGENERATE_TRIAL = "DEGENERATE_TRIAL"
    INSUFFICIENT_NEGATIVES = "INSUFFICIENT_NEGATIVES"
    CONSISTENCY_ERROR = "CONSISTENCY_ERROR"
    INVARIANT_VIOLATION = "INVARIANT_VIOLATION"


# Коды выхода CLI
EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RESOURCE = 3
EXIT_DEGENERATE = 4
EXIT_INTERNAL = 1


class BoundsError(Exception):
    """Базовая ошибка расчёта границ"""
    error_code: ErrorCode = ErrorCode.INVALID_INPUT
    exit_code: int = EXIT_INPUT
    http_status: int = 400

    def __init__(self, message: str, hint: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.hint = hint

    def to_dict(self) -> dict:
        return {
            "detail": self.message,
            "error_code": self.error_code.value,
            "hint": self.hint,
        }


class InputError(BoundsError):
    """Некорректные входные данные (CSV ячеек, флаги, счётчики)"""


class GraphParseError(InputError):
    """Ошибка разбора списка рёбер"""
    error_code = ErrorCode.PARSE_ERROR

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}",
                         hint="Expected 'src dst' or 'src dst weight'")
        self.line_number = line_number


class EmptyGraphError(InputError):
    """Граф без вершин"""
    error_code = ErrorCode.EMPTY_GRAPH


class ResourceLimitError(BoundsError):
    """Превышен лимит вершин для точной канонизации"""
    error_code = ErrorCode.RESOURCE_LIMIT
    exit_code = EXIT_RESOURCE
    http_status = 413


class OracleBudgetError(ResourceLimitError):
    """Превышен бюджет переборного оракула"""
    error_code = ErrorCode.ORACLE_BUDGET


class DegenerateMetricError(BoundsError):
    """Метрика не определена: нет позитивов (P=0) или негативов (N=0)"""
    error_code = ErrorCode.DEGENERATE_METRIC
    exit_code = EXIT_DEGENERATE
    http_status = 422


class DegenerateTrialError(BoundsError):
    """Все попытки удаления рёбер дали вырожденное испытание"""
    error_code = ErrorCode.DEGENERATE_TRIAL
    exit_code = EXIT_DEGENERATE
    http_status = 422


class InsufficientNegativesError(InputError):
    """Негативов меньше, чем требует прореживание"""
    error_code = ErrorCode.INSUFFICIENT_NEGATIVES


class ConsistencyError(BoundsError):
    """Позитив вне множества пар разбиения: сломана связка эксперимента"""
    error_code = ErrorCode.CONSISTENCY_ERROR
    exit_code = EXIT_INTERNAL
    http_status = 500


class InvariantViolationError(BoundsError):
    """Нарушен инвариант (не автоморфизм, неполное разбиение)"""
    error_code = ErrorCode.INVARIANT_VIOLATION
    exit_code = EXIT_INTERNAL
    http_status = 500
