from typing import List, Optional

from fastapi import APIRouter, File, Form, HTTPException, UploadFile, status
from fastapi.concurrency import run_in_threadpool
from pydantic import BaseModel, Field
import structlog

from app.models.run import EDGE_LIST_MAX_BYTES
from app.services.partition import global_orbit_partition, khop_partition, partition_rows
from app.utils.edge_list import load_edge_list
from app.utils.errors import InputError

logger = structlog.get_logger()
router = APIRouter()


class PartitionRow(BaseModel):
    pair_a: str
    pair_b: str
    block_key_hex: str


class OrbitsResponse(BaseModel):
    """Разбиение не-рёбер на ячейки"""
    mode: str = Field(description="global или khop")
    k: Optional[int] = None
    pairs: int = Field(description="Число не-рёбер")
    blocks: int = Field(description="Число ячеек")
    rows: List[PartitionRow]


@router.post(
    "/orbits",
    response_model=OrbitsResponse,
    responses={
        400: {"description": "Unparseable edge list"},
        413: {"description": "Upload too large or graph above the canonicalization cap"},
    },
)
async def compute_orbits(
    file: UploadFile = File(description="Список рёбер"),
    directed: bool = Form(default=False),
    k: Optional[int] = Form(default=None, ge=1, description="k для k-hop ячеек; пусто: орбиты"),
    include_self_loops: bool = Form(default=False),
    respect_direction: bool = Form(default=False),
):
    """
    Ячейки не-рёбер загруженного графа: орбиты Aut(G) или классы k-hop окрестностей.
    """
    raw = await file.read()
    if len(raw) > EDGE_LIST_MAX_BYTES:
        raise HTTPException(
            status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE,
            detail=f"Edge list exceeds {EDGE_LIST_MAX_BYTES} bytes",
        )
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise InputError(f"Edge list is not UTF-8: {e}")

    g = load_edge_list(text, directed, include_self_loops=include_self_loops)
    logger.info("Orbit partition requested", filename=file.filename, nodes=g.n, k=k)
    if k is None:
        part = await run_in_threadpool(global_orbit_partition, g)
    else:
        part = await run_in_threadpool(khop_partition, g, k, respect_direction=respect_direction)
    return OrbitsResponse(
        mode=part.mode.value,
        k=part.k,
        pairs=len(part.pairs),
        blocks=part.num_blocks,
        rows=[PartitionRow(pair_a=a, pair_b=b, block_key_hex=key) for a, b, key in partition_rows(part, g)],
    )
