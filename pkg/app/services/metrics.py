"""
Максимальные ROC / AUPR / AP для ячеек, которые любой инвариантный к
перенумерации предиктор обязан оценивать одинаково.

Целочисленные кумулятивные суммы считаются точно (python int), плавающая
точка появляется только в финальном делении и логарифме.
"""
import math
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np
import structlog

from app.models.metrics import ApBound, BoundReport, LabeledCells, OrderedCells, PR_INTERPOLATION
from app.utils.errors import DegenerateMetricError, InputError, InsufficientNegativesError

logger = structlog.get_logger()


def _cumulative(values: List[int]) -> Tuple[int, ...]:
    out = [0]
    for v in values:
        out.append(out[-1] + v)
    return tuple(out)


def sort_cells(cells: LabeledCells) -> OrderedCells:
    """
    Сортирует ячейки по убыванию p/t и сливает ячейки с равной плотностью.

    Плотности сравниваются точно: сначала каждая пара (p, t) сокращается на
    НОД, затем одинаковые несократимые дроби суммируются, группы сортируются
    по Fraction.

    Raises:
        DegenerateMetricError: P = 0 или N = 0
    """
    if len(cells) == 0:
        raise DegenerateMetricError("No cells to score")
    P = cells.positives
    N = cells.negatives
    if P == 0:
        raise DegenerateMetricError("No positives: bounds are undefined", hint="P = 0")
    if N == 0:
        raise DegenerateMetricError("No negatives: bounds are undefined", hint="N = 0")

    t = cells.t
    g = np.gcd(cells.p, t)
    reduced = np.stack([cells.p // g, t // g], axis=1)
    groups, inverse = np.unique(reduced, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    p_sum = np.zeros(len(groups), dtype=np.int64)
    n_sum = np.zeros(len(groups), dtype=np.int64)
    np.add.at(p_sum, inverse, cells.p)
    np.add.at(n_sum, inverse, cells.n)

    order = sorted(range(len(groups)),
                   key=lambda i: Fraction(int(groups[i, 0]), int(groups[i, 1])),
                   reverse=True)
    p_sorted = p_sum[order]
    n_sorted = n_sum[order]
    merged = LabeledCells(p_sorted, n_sorted)
    logger.debug("Cells sorted", cells_in=len(cells), cells_out=len(merged),
                 positives=P, negatives=N)
    return OrderedCells(
        cells=merged,
        cum_p=_cumulative(p_sorted.tolist()),
        cum_n=_cumulative(n_sorted.tolist()),
    )


def max_roc_exact(oc: OrderedCells) -> Fraction:
    """Σ p_i·(2N − N_i − N_{i−1}) / (2·N·P) по убывающему порядку"""
    P, N = oc.P, oc.N
    total = 0
    for i, p in enumerate(oc.cells.p.tolist(), start=1):
        total += p * (2 * N - oc.cum_n[i] - oc.cum_n[i - 1])
    return Fraction(total, 2 * N * P)


def max_roc(oc: OrderedCells) -> float:
    """
    Максимальный ROC AUC.

    Совпадает с ранговой статистикой: (согласованные пары + половина
    ничьих) / (P·N); единственная смешанная ячейка даёт 0.5.
    """
    return float(max_roc_exact(oc))


def interpolated_aupr(cells: LabeledCells) -> float:
    """
    AUPR в ЗАДАННОМ порядке ячеек с гиперболической интерполяцией.

    Слагаемое с p_i = 0 равно 0; первое слагаемое (T_0 = 0) равно
    (p_1/P)·(p_1/t_1).
    """
    P = cells.positives
    if P == 0:
        raise DegenerateMetricError("No positives: AUPR is undefined", hint="P = 0")
    total = 0.0
    cum_p = 0
    cum_t = 0
    for p, n in zip(cells.p.tolist(), cells.n.tolist()):
        t = p + n
        if p:
            head = (p / P) * (p / t)
            if cum_t == 0:
                total += head
            else:
                slope = cum_p / p - cum_t / t
                total += head * (1.0 + slope * math.log1p(t / cum_t))
        cum_p += p
        cum_t += t
    return total


def max_aupr(oc: OrderedCells) -> float:
    """Максимальный AUPR: интерполированная площадь в порядке убывания плотности"""
    return interpolated_aupr(oc.cells)


def average_precision(cells: LabeledCells) -> float:
    """
    AP в ЗАДАННОМ порядке ячеек: Σ (p_i/P)·(P_i/T_i).

    Порядок не меняется: AP чувствителен к порядку и не максимизируется
    сортировкой по плотности.
    """
    P = cells.positives
    if P == 0:
        raise DegenerateMetricError("No positives: AP is undefined", hint="P = 0")
    total = 0.0
    cum_p = 0
    cum_t = 0
    for p, n in zip(cells.p.tolist(), cells.n.tolist()):
        cum_p += p
        cum_t += p + n
        if p:
            total += (p / P) * (cum_p / cum_t)
    return total


def max_ap_bound(oc: OrderedCells) -> ApBound:
    """Граница AP = max AUPR; AP при сортированном порядке: нижний свидетель"""
    return ApBound(bound=max_aupr(oc), sorted_ap=average_precision(oc.cells))


def downsample_negatives(cells: LabeledCells, ratio: float, rng: np.random.Generator) -> LabeledCells:
    """
    Прореживает негативы до round(P / ratio) равномерно без возвращения.

    Число оставшихся негативов по ячейкам имеет многомерное
    гипергеометрическое распределение; позитивы не трогаются, ячейки
    (0, 0) удаляются.

    Args:
        cells: Размеченные ячейки
        ratio: Позитивов на один негатив (1.0: прореживание 1:1)
        rng: Генератор numpy

    Raises:
        InsufficientNegativesError: Негативов меньше целевого числа
    """
    if ratio <= 0:
        raise InputError(f"Downsampling ratio must be positive, got {ratio}")
    target = int(round(cells.positives / ratio))
    available = cells.negatives
    if target > available:
        raise InsufficientNegativesError(
            f"Downsampling needs {target} negatives, only {available} available",
            hint="Lower the positives-per-negative ratio",
        )
    if target == available:
        return cells
    drawn = rng.multivariate_hypergeometric(cells.n, target)
    keep = (cells.p + drawn) > 0
    return LabeledCells(cells.p[keep], drawn[keep])


def curve_points(oc: OrderedCells) -> Tuple[List[Tuple[float, float]], List[Tuple[float, float]]]:
    """
    Базовые точки кривых для сортированного порядка.

    Returns:
        (roc_points, pr_points): ROC (N_j/N, P_j/P) и PR (P_j/P, P_j/T_j),
        j = 0..k. В точке j = 0 точность доопределена пределом p_1/t_1.
    """
    P, N = oc.P, oc.N
    roc = [(oc.cum_n[j] / N, oc.cum_p[j] / P) for j in range(len(oc) + 1)]
    first = oc.cells.p[0] / oc.cells.t[0]
    pr = [(0.0, float(first))]
    for j in range(1, len(oc) + 1):
        pr.append((oc.cum_p[j] / P, oc.cum_p[j] / oc.cum_t(j)))
    return roc, pr


def _unit(value: float) -> float:
    return min(1.0, max(0.0, value))


def bound_report(
    cells: LabeledCells,
    downsample: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
) -> BoundReport:
    """
    Полный отчёт по ячейкам; для P = 0 или N = 0: явный defined=False.

    При downsample негативы сначала прореживаются генератором rng.
    """
    if downsample is not None:
        if rng is None:
            raise InputError("Downsampling needs a random generator")
        cells = downsample_negatives(cells, downsample, rng)
    try:
        oc = sort_cells(cells)
    except DegenerateMetricError as e:
        logger.warning("Bounds undefined", reason=e.message,
                       positives=cells.positives, negatives=cells.negatives)
        return BoundReport(
            defined=False,
            reason=e.message,
            positives=cells.positives,
            negatives=cells.negatives,
            cells=len(cells),
        )

    ap = max_ap_bound(oc)
    roc_points, pr_points = curve_points(oc)
    return BoundReport(
        defined=True,
        max_roc=_unit(max_roc(oc)),
        max_aupr=_unit(ap.bound),
        max_ap=_unit(ap.bound),
        ap_sorted=_unit(ap.sorted_ap),
        positives=oc.P,
        negatives=oc.N,
        cells=len(oc),
        roc_points=roc_points,
        pr_points=pr_points,
        interpolation=PR_INTERPOLATION,
    )
