from fastapi import APIRouter, status
import numpy as np
import structlog

from app.models.metrics import LabeledCells, MetricsRequest, MetricsResponse
from app.models.oracle import OrderingResult, OrderingsRequest
from app.services.metrics import average_precision, bound_report
from app.services.oracle import best_ordering_exhaustive

logger = structlog.get_logger()
router = APIRouter()


@router.post(
    "/metrics",
    response_model=MetricsResponse,
    status_code=status.HTTP_200_OK,
    responses={
        400: {"description": "Invalid cells"},
        422: {"description": "Validation errors"},
    },
)
async def compute_metrics(request: MetricsRequest):
    """
    Максимальные ROC / AUPR / AP для готовых ячеек (p, n).

    Если P = 0 или N = 0, отчёт возвращается с defined=false.
    AP в порядке запроса считается отдельно: AP чувствителен к порядку.
    """
    cells = request.labeled()
    logger.info("Computing bounds for cells", cells=len(cells), positives=cells.positives,
                negatives=cells.negatives, downsample=request.downsample)
    rng = np.random.default_rng(request.seed) if request.downsample is not None else None
    report = bound_report(cells, request.downsample, rng)
    listed = average_precision(cells) if cells.positives and request.downsample is None else None
    return MetricsResponse(report=report, listed_order_ap=listed)


@router.post(
    "/oracle/orderings",
    response_model=OrderingResult,
    responses={
        413: {"description": "Ordering search exceeds the oracle budget"},
        422: {"description": "Degenerate cells (P=0 or N=0)"},
    },
)
def exhaustive_orderings(request: OrderingsRequest):
    """
    Перебор всех порядков ячеек: лучший порядок и достигает ли его сортировка по плотности.
    """
    cells = LabeledCells.from_pairs(request.cells)
    logger.info("Exhaustive ordering requested", cells=len(cells), metric=request.metric.value)
    return best_ordering_exhaustive(cells, request.metric)
