"""
Отчёты: JSON результата (числа с 17 значащими цифрами), CSV для графика
границ по k и дамп разбиения.

Манифест (версия, время, тайминги) хранится отдельно от числовой части,
поэтому повторный запуск с той же конфигурацией даёт побайтно равный result.
"""
import csv
import json
import io
import math
import time
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import structlog
from pydantic import BaseModel

from app import __version__
from app.models.experiment import BoundSummary, ExperimentConfig, ReportedComparison
from app.models.graph import Graph
from app.models.run import RunManifest

logger = structlog.get_logger()

REPORT_FILE = "bounds.json"
PLOT_FILE = "bounds_by_k.csv"
PLOT_HEADER = ("k", "trial", "aupr_bound")
PARTITION_HEADER = ("pair_a", "pair_b", "block_key_hex")


def format_float(value: float) -> str:
    """17 значащих цифр: двоичное значение восстанавливается без потерь"""
    if math.isnan(value) or math.isinf(value):
        return "null"
    text = f"{value:.17g}"
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def _to_plain(obj: Any) -> Any:
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="python", by_alias=True)
    if isinstance(obj, Enum):
        return obj.value
    return obj


def render_json(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """Детерминированная сериализация в JSON с точным форматом float"""
    obj = _to_plain(obj)
    pad = " " * (indent * (_level + 1))
    end_pad = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{render_json(str(k))}: {render_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end_pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(_to_plain(v), (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(render_json(v, indent, _level + 1) for v in obj) + "]"
        items = [f"{pad}{render_json(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end_pad + "]"
    raise TypeError(f"Cannot serialize {type(obj).__name__} to JSON")


def graph_descriptor(g: Graph, name: str, digest: str) -> Dict[str, Any]:
    return {
        "name": name,
        "sha256": digest,
        "directed": g.directed,
        "nodes": g.n,
        "edges": g.num_edges,
        "self_loops": len(g.loops),
    }


def experiment_payload(
    graph: Dict[str, Any],
    cfg: ExperimentConfig,
    summary: BoundSummary,
    comparisons: Optional[List[ReportedComparison]] = None,
) -> Dict[str, Any]:
    """Числовая часть отчёта: зависит только от графа и конфигурации"""
    dumped = summary.model_dump(mode="python", by_alias=True)
    payload = {
        "graph": graph,
        "config": cfg.model_dump(mode="python"),
        "trials": dumped["trials"],
        "redraws": dumped["redraws"],
        "k_stops": dumped["k_stops"],
        "per_k": dumped["per_k"],
        "global": dumped["global"],
    }
    if comparisons:
        payload["reported"] = [c.model_dump(mode="python") for c in comparisons]
    return payload


def build_manifest(graph_name: str, digest: str, cfg: ExperimentConfig, started: float,
                   summary: Optional[BoundSummary] = None, workers: int = 1) -> RunManifest:
    timings: Dict[str, int] = {}
    if summary is not None:
        for result in summary.trial_results:
            for stage, ms in result.timings_ms.items():
                timings[stage] = timings.get(stage, 0) + ms
    return RunManifest(
        tool_version=__version__,
        graph_sha256=digest,
        graph_name=graph_name,
        config=cfg.model_dump(mode="python"),
        started_at=datetime.fromtimestamp(started, tz=timezone.utc).isoformat(),
        wall_clock_ms=int((time.time() - started) * 1000),
        timings_ms=timings,
        workers=workers,
    )


def report_document(payload: Dict[str, Any], manifest: RunManifest) -> str:
    return render_json({"manifest": manifest, "result": payload}) + "\n"


def plot_rows(summary: BoundSummary) -> List[Tuple[str, int, float]]:
    """Строки (k, trial, aupr_bound): по одной на испытание и уровень"""
    rows: List[Tuple[str, int, float]] = []
    for level in summary.per_k + [summary.global_]:
        label = "global" if level.k is None else str(level.k)
        for trial, value in zip(level.trials, level.aupr.samples):
            rows.append((label, trial, value))
    return rows


def _write_csv(target: Union[str, Path, io.TextIOBase], header: Tuple[str, ...],
               rows: Iterable[Tuple]) -> None:
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            _write_csv(fh, header, rows)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])


def write_plot_csv(target, summary: BoundSummary) -> None:
    _write_csv(target, PLOT_HEADER, plot_rows(summary))


def write_partition_csv(target, rows: Iterable[Tuple[str, str, str]]) -> None:
    _write_csv(target, PARTITION_HEADER, rows)


def write_bounds_report(out_dir: Union[str, Path], payload: Dict[str, Any], manifest: RunManifest,
                        summary: BoundSummary) -> Tuple[Path, Path]:
    """Пишет JSON отчёта и CSV графика в каталог out_dir"""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / REPORT_FILE
    plot_path = out / PLOT_FILE
    report_path.write_text(report_document(payload, manifest), encoding="utf-8")
    write_plot_csv(plot_path, summary)
    logger.info("Bounds report written", report=str(report_path), plot=str(plot_path))
    return report_path, plot_path


def _cell(metric) -> str:
    if metric.mean is None:
        return "undefined"
    if not metric.width_defined:
        return f"{metric.mean:.6f}"
    return f"{metric.mean:.6f} ± {metric.ci_halfwidth:.6f}"


def summary_table(summary: BoundSummary) -> str:
    """Текстовая таблица: среднее ± полуширина ДИ по уровням"""
    downsampled = summary.global_.downsampled_ap_bound is not None
    header = ["k", "trials", "max ROC", "max AUPR", "AP bound"]
    if downsampled:
        header.append("AP bound (downsampled)")
    lines = [" | ".join(header)]
    for level in summary.per_k + [summary.global_]:
        row = [
            "global" if level.k is None else str(level.k),
            str(len(level.trials)),
            _cell(level.roc),
            _cell(level.aupr),
            _cell(level.ap_bound),
        ]
        if downsampled:
            row.append(_cell(level.downsampled_ap_bound) if level.downsampled_ap_bound else "-")
        lines.append(" | ".join(row))
    return "\n".join(lines)
