"""
Процедура оценки границ: случайное удаление рёбер, орбиты и k-hop ячейки
остаточного графа, критерий остановки по k и агрегирование испытаний.
"""
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from app.models.experiment import (
    CI_Z,
    DEFAULT_WORKERS,
    MONOTONE_TOLERANCE,
    BoundSummary,
    ExperimentConfig,
    LevelBounds,
    LevelSummary,
    MetricSummary,
    ReportedComparison,
    TrialResult,
    Verdict,
)
from app.models.graph import Graph
from app.models.metrics import LabeledCells
from app.models.partition import CellPartition
from app.services.graph_core import non_edges, without_edges
from app.services.metrics import bound_report
from app.services.partition import global_orbit_partition, khop_partition, label_cells
from app.utils.errors import DegenerateTrialError, InputError

logger = structlog.get_logger()

# Независимые потоки случайности внутри испытания
REMOVAL_STREAM = 0
DOWNSAMPLE_STREAM = 1


def derive_trial_rng(master_seed: int, trial_index: int, redraw: int = 0,
                     stream: int = REMOVAL_STREAM) -> np.random.Generator:
    """Генератор испытания: SeedSequence(master_seed) с ключом (trial, redraw, stream)"""
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial_index, redraw, stream))
    return np.random.default_rng(seq)


def remove_edges(g: Graph, p: float, rng: np.random.Generator) -> Tuple[Graph, List[Tuple[int, int]]]:
    """
    Удаляет каждое ребро независимо с вероятностью p.

    Returns:
        (h, positives): остаточный граф и удалённые рёбра в порядке сортировки
    """
    if not 0.0 < p < 1.0:
        raise InputError(f"Removal probability must be in (0, 1), got {p}")
    edges = g.sorted_edges()
    mask = rng.random(len(edges)) < p
    positives = [e for e, removed in zip(edges, mask.tolist()) if removed]
    return without_edges(g, positives), positives


def _level(part: CellPartition, positives: Sequence[Tuple[int, int]], cfg: ExperimentConfig,
           ds_rng: Optional[np.random.Generator]) -> LevelBounds:
    cells: LabeledCells = label_cells(part, positives)
    downsampled = None
    if cfg.downsample is not None:
        downsampled = bound_report(cells, cfg.downsample, ds_rng)
    return LevelBounds(k=part.k, blocks=part.num_blocks, report=bound_report(cells),
                       downsampled=downsampled)


def _is_monotone(levels: List[LevelBounds]) -> bool:
    defined = [lv.report for lv in levels if lv.report.defined]
    for lower, upper in zip(defined, defined[1:]):
        if lower.max_aupr > upper.max_aupr + MONOTONE_TOLERANCE:
            return False
        if lower.max_roc > upper.max_roc + MONOTONE_TOLERANCE:
            return False
    return True


def _downsample_dominates(levels: List[LevelBounds]) -> Optional[bool]:
    """Прореживание негативов не может понизить AUPR и границу AP"""
    pairs = [(lv.report, lv.downsampled) for lv in levels if lv.downsampled is not None]
    if not pairs:
        return None
    for full, sampled in pairs:
        if not (full.defined and sampled.defined):
            continue
        if sampled.max_aupr < full.max_aupr - MONOTONE_TOLERANCE:
            return False
        if sampled.max_ap < full.max_ap - MONOTONE_TOLERANCE:
            return False
    return True


def run_trial(g: Graph, cfg: ExperimentConfig, trial_index: int, workers: int = 1) -> TrialResult:
    """
    Одно испытание: удаление рёбер, глобальные орбиты, затем k = 1, 2, ...
    до |AUPR_k − AUPR_global| <= stop_epsilon или k = k_max.

    Raises:
        DegenerateTrialError: Все max_redraws + 1 попыток дали пустые позитивы или пустой H
    """
    timings: Dict[str, int] = {}
    started = time.time()
    for redraw in range(cfg.max_redraws + 1):
        rng = derive_trial_rng(cfg.master_seed, trial_index, redraw)
        h, positives = remove_edges(g, cfg.removal_prob, rng)
        if positives and h.num_edges > 0:
            break
        logger.warning("Degenerate removal, redrawing", trial=trial_index, redraw=redraw,
                       positives=len(positives), residual_edges=h.num_edges)
    else:
        raise DegenerateTrialError(
            f"Trial {trial_index}: no usable edge removal after {cfg.max_redraws + 1} draws",
            hint="Increase removal probability or the redraw budget",
        )
    timings["removal"] = int((time.time() - started) * 1000)

    ds_rng = None
    if cfg.downsample is not None:
        ds_rng = derive_trial_rng(cfg.master_seed, trial_index, redraw, DOWNSAMPLE_STREAM)

    universe = non_edges(h)
    stage = time.time()
    global_level = _level(global_orbit_partition(h, universe), positives, cfg, ds_rng)
    timings["global"] = int((time.time() - stage) * 1000)
    global_report = global_level.report

    per_k: List[LevelBounds] = []
    k_stop = None
    for k in range(1, cfg.k_max + 1):
        stage = time.time()
        part = khop_partition(h, k, universe, cfg.respect_direction, cfg.approx_wl, workers)
        level = _level(part, positives, cfg, ds_rng)
        timings[f"k={k}"] = int((time.time() - stage) * 1000)
        per_k.append(level)
        if (level.report.defined and global_report.defined
                and abs(level.report.max_aupr - global_report.max_aupr) <= cfg.stop_epsilon):
            k_stop = k
            break

    monotone = _is_monotone(per_k + [global_level])
    if not monotone:
        logger.warning("Bounds are not monotone in k", trial=trial_index,
                       aupr=[lv.report.max_aupr for lv in per_k + [global_level]])
    dominates = _downsample_dominates(per_k + [global_level])
    if dominates is False:
        logger.warning("Downsampled bound below full-negative bound", trial=trial_index)

    result = TrialResult(
        trial=trial_index,
        positives=len(positives),
        negatives=len(universe) - len(positives),
        redraws=redraw,
        global_bounds=global_level,
        per_k=per_k,
        k_stop=k_stop,
        monotone=monotone,
        downsample_dominates=dominates,
        timings_ms=timings,
    )
    logger.info("Trial completed", trial=trial_index, positives=result.positives,
                negatives=result.negatives, redraws=redraw, k_stop=k_stop,
                global_aupr=global_report.max_aupr, global_roc=global_report.max_roc,
                elapsed_ms=int((time.time() - started) * 1000))
    return result


def confidence_interval(samples: Sequence[float]) -> Tuple[float, Optional[float]]:
    """
    Нормальный 95% ДИ: (среднее, 1.96·s/√m), s: выборочное стандартное
    отклонение. Для одного значения полуширина не определена (None).
    """
    if len(samples) == 0:
        raise InputError("Confidence interval needs at least one sample")
    values = np.asarray(samples, dtype=float)
    mean = float(values.mean())
    if len(values) < 2:
        return mean, None
    halfwidth = CI_Z * float(values.std(ddof=1)) / float(np.sqrt(len(values)))
    return mean, halfwidth


def _metric_summary(samples: List[float]) -> MetricSummary:
    if not samples:
        return MetricSummary()
    mean, halfwidth = confidence_interval(samples)
    return MetricSummary(
        mean=mean,
        ci_halfwidth=halfwidth if halfwidth is not None else 0.0,
        width_defined=halfwidth is not None,
        count=len(samples),
        samples=list(samples),
    )


def _level_summary(k: Optional[int], levels: List[Tuple[int, LevelBounds]]) -> LevelSummary:
    defined = [(trial, lv) for trial, lv in levels if lv.report.defined]
    summary = LevelSummary(
        k=k,
        trials=[trial for trial, _ in defined],
        roc=_metric_summary([lv.report.max_roc for _, lv in defined]),
        aupr=_metric_summary([lv.report.max_aupr for _, lv in defined]),
        ap_bound=_metric_summary([lv.report.max_ap for _, lv in defined]),
        ap_sorted=_metric_summary([lv.report.ap_sorted for _, lv in defined]),
        undefined=len(levels) - len(defined),
    )
    sampled = [lv.downsampled for _, lv in levels if lv.downsampled is not None]
    if sampled:
        summary.downsampled_ap_bound = _metric_summary([r.max_ap for r in sampled if r.defined])
    return summary


def summarize(results: List[TrialResult]) -> BoundSummary:
    """Агрегирует испытания; уровень k учитывает только дошедшие до него испытания"""
    results = sorted(results, key=lambda r: r.trial)
    by_k: Dict[int, List[Tuple[int, LevelBounds]]] = {}
    for r in results:
        for lv in r.per_k:
            by_k.setdefault(lv.k, []).append((r.trial, lv))
    return BoundSummary(
        trials=len(results),
        redraws=sum(r.redraws for r in results),
        k_stops=[r.k_stop for r in results],
        per_k=[_level_summary(k, by_k[k]) for k in sorted(by_k)],
        global_=_level_summary(None, [(r.trial, r.global_bounds) for r in results]),
        trial_results=results,
    )


def run_experiment(g: Graph, cfg: ExperimentConfig, workers: int = DEFAULT_WORKERS) -> BoundSummary:
    """
    Запускает cfg.trials испытаний и агрегирует границы.

    Испытания параллелятся процессами при workers > 1; каждое испытание
    владеет своим потоком случайности, поэтому результат не зависит от
    числа процессов.
    """
    started = time.time()
    logger.info("Experiment started", nodes=g.n, edges=g.num_edges, trials=cfg.trials,
                workers=workers, seed=cfg.master_seed, k_max=cfg.k_max)
    indices = list(range(cfg.trials))
    if workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_trial, [g] * len(indices), [cfg] * len(indices), indices))
    else:
        results = [run_trial(g, cfg, i, workers) for i in indices]

    summary = summarize(results)
    logger.info("Experiment completed", trials=summary.trials, redraws=summary.redraws,
                global_aupr=summary.global_.aupr.mean, global_roc=summary.global_.roc.mean,
                elapsed_ms=int((time.time() - started) * 1000))
    return summary


REPORTED_METRICS = ("roc", "aupr", "ap")


def compare_reported(summary: BoundSummary, reported: Dict[str, float]) -> List[ReportedComparison]:
    """
    Сравнивает опубликованные метрики предиктора с глобальными границами.

    Значение выше верхнего края ДИ границы невозможно на полном множестве
    негативов; для AP это обычно означает прореживание негативов.
    """
    level = summary.global_
    comparisons = []
    for metric, value in reported.items():
        if metric not in REPORTED_METRICS:
            raise InputError(f"Unknown metric '{metric}', expected one of {', '.join(REPORTED_METRICS)}")
        bound = {"roc": level.roc, "aupr": level.aupr, "ap": level.ap_bound}[metric]
        if bound.mean is None:
            raise InputError(f"Bound for '{metric}' is undefined for this graph")
        above = value > bound.mean + bound.ci_halfwidth
        note = None
        if above and metric == "ap":
            ds = level.downsampled_ap_bound
            if ds is not None and ds.mean is not None and value <= ds.mean + ds.ci_halfwidth:
                note = "Consistent only with downsampled negatives"
            else:
                note = "Evaluation likely downsampled negatives; compare against the downsampled bound"
        comparisons.append(ReportedComparison(
            metric=metric,
            reported=value,
            bound_mean=bound.mean,
            bound_ci=bound.ci_halfwidth,
            verdict=Verdict.ABOVE_BOUND if above else Verdict.BELOW_BOUND,
            note=note,
        ))
    return comparisons
