import hashlib
import json
import time
from typing import List, Optional, Tuple

import structlog
from sqlalchemy.orm import Session

from app.models.run import BoundRun, RunCreate, RunResponse, RunStatus
from app.services.experiment import compare_reported, run_experiment
from app.utils.edge_list import load_edge_list
from app.utils.errors import BoundsError
from app.utils.reports import build_manifest, experiment_payload, graph_descriptor, render_json

logger = structlog.get_logger()


class RunService:
    """Сервис расчёта и хранения запусков"""

    def __init__(self, db: Session, workers: int = 1):
        self.db = db
        self.workers = workers

    def create_run(self, request: RunCreate) -> BoundRun:
        """
        Считает границы по списку рёбер и сохраняет запуск.

        Ошибка расчёта тоже сохраняется (статус failed) и пробрасывается дальше.
        """
        started = time.time()
        cfg = request.config
        raw = request.edge_list.encode("utf-8")
        digest = hashlib.sha256(raw).hexdigest()
        run = BoundRun(
            graph_name=request.graph_name,
            graph_digest=digest,
            config_json=render_json(cfg.model_dump(mode="python")),
        )
        logger.info("Starting run", graph_name=request.graph_name, graph_digest=digest,
                    trials=cfg.trials, seed=cfg.master_seed)
        try:
            g = load_edge_list(request.edge_list, cfg.directed,
                               include_self_loops=cfg.include_self_loops)
            summary = run_experiment(g, cfg, self.workers)
            comparisons = compare_reported(summary, request.reported) if request.reported else None
            payload = experiment_payload(graph_descriptor(g, request.graph_name, digest), cfg,
                                         summary, comparisons)
            manifest = build_manifest(request.graph_name, digest, cfg, started, summary, self.workers)
            run.status = RunStatus.COMPLETED.value
            run.summary_json = render_json(payload)
            run.manifest_json = render_json(manifest)
        except BoundsError as e:
            run.status = RunStatus.FAILED.value
            run.error_json = render_json(e.to_dict())
            self._save(run)
            logger.warning("Run failed", run_id=run.id, error_code=e.error_code.value, error=e.message)
            raise

        self._save(run)
        logger.info("Run completed", run_id=run.id, processing_time_ms=int((time.time() - started) * 1000))
        return run

    def _save(self, run: BoundRun) -> None:
        self.db.add(run)
        self.db.commit()
        self.db.refresh(run)

    def get_run(self, run_id: int) -> Optional[BoundRun]:
        return self.db.query(BoundRun).filter(BoundRun.id == run_id).first()

    def list_runs(self, limit: int, after_id: Optional[int] = None) -> Tuple[List[BoundRun], bool]:
        """Страница запусков по убыванию id; после курсора: только id < after_id"""
        query = self.db.query(BoundRun)
        if after_id is not None:
            query = query.filter(BoundRun.id < after_id)
        runs = query.order_by(BoundRun.id.desc()).limit(limit + 1).all()
        has_more = len(runs) > limit
        return runs[:limit], has_more


def to_response(run: BoundRun) -> RunResponse:
    def parse(text: Optional[str]):
        return json.loads(text) if text else None

    return RunResponse(
        id=run.id,
        graph_name=run.graph_name,
        graph_digest=run.graph_digest,
        status=RunStatus(run.status),
        config=parse(run.config_json),
        summary=parse(run.summary_json),
        manifest=parse(run.manifest_json),
        error=parse(run.error_json),
        created_at=run.created_at,
    )
