"""
Переборные проверки, независимые от замкнутых формул: все перестановки
вершин, все порядки ячеек, численное интегрирование PR-кривой и точный
подсчёт пар для ROC.
"""
import itertools
from collections import deque
from fractions import Fraction
from typing import List, Optional, Set, Tuple

import structlog
from scipy.integrate import quad

from app.models.canonical import Coloring, GeneratorSet
from app.models.graph import Graph, Permutation
from app.models.metrics import LabeledCells
from app.models.oracle import OracleBudget, OracleMetric, OrderingResult
from app.services.canonical import is_automorphism
from app.services.metrics import average_precision, max_aupr, max_roc, sort_cells
from app.utils.errors import DegenerateMetricError, OracleBudgetError

logger = structlog.get_logger()

DEFAULT_BUDGET = OracleBudget()


def brute_automorphisms(g: Graph, budget: OracleBudget = DEFAULT_BUDGET,
                        init: Optional[Coloring] = None) -> GeneratorSet:
    """
    Все n! перестановок, сохраняющих E (и раскраску init).

    Raises:
        OracleBudgetError: n больше budget.max_nodes
    """
    if g.n > budget.max_nodes:
        raise OracleBudgetError(
            f"Permutation search over {g.n} nodes exceeds the budget of {budget.max_nodes}")
    degrees = g.degrees()
    found = []
    for image in itertools.permutations(range(g.n)):
        if any(degrees[v] != degrees[w] for v, w in enumerate(image)):
            continue
        perm = Permutation(image)
        if is_automorphism(g, perm, init):
            found.append(perm)
    logger.debug("Brute-force automorphisms enumerated", nodes=g.n, automorphisms=len(found))
    return GeneratorSet(n=g.n, generators=tuple(found))


def generated_group(gens: GeneratorSet) -> Set[Tuple[int, ...]]:
    """Все элементы группы, порождённой gens (замыкание обходом в ширину)"""
    identity = tuple(range(gens.n))
    group = {identity}
    queue = deque([identity])
    while queue:
        current = queue.popleft()
        for gen in gens.generators:
            nxt = tuple(gen.image[v] for v in current)
            if nxt not in group:
                group.add(nxt)
                queue.append(nxt)
    return group


def _totals(cells: LabeledCells) -> Tuple[int, int]:
    P, N = cells.positives, cells.negatives
    if P == 0 or N == 0:
        raise DegenerateMetricError("Oracle needs at least one positive and one negative")
    return P, N


def roc_pair_count(cells: LabeledCells) -> Fraction:
    """
    ROC в заданном порядке ячеек точным подсчётом пар:
    (Σ p_i·(N − N_i) + Σ p_i·n_i / 2) / (P·N).
    """
    P, N = _totals(cells)
    wins = Fraction(0)
    cum_n = 0
    for p, n in cells.as_tuples():
        cum_n += n
        wins += p * (N - cum_n) + Fraction(p * n, 2)
    return wins / (P * N)


def aupr_numeric(cells: LabeledCells, tolerance: float = DEFAULT_BUDGET.tolerance) -> float:
    """
    Площадь под PR-кривой в заданном порядке, интерполированной смесью
    соседних классификаторов: на отрезке j при α ∈ [0, 1]
    recall = (P_j + α·p)/P, precision = (P_j + α·p)/(T_j + α·t).
    """
    P, _ = _totals(cells)
    segments = cells.as_tuples()
    per_segment = tolerance / max(len(segments), 1)
    area = 0.0
    cum_p = 0
    cum_t = 0
    for p, n in segments:
        t = p + n
        if p:
            if cum_t == 0:
                area += (p / P) * (p / t)
            else:
                def integrand(alpha, cp=cum_p, ct=cum_t, p=p, t=t):
                    return (cp + alpha * p) / (ct + alpha * t)
                value, _ = quad(integrand, 0.0, 1.0, epsabs=per_segment, epsrel=0.0)
                area += value * p / P
        cum_p += p
        cum_t += t
    return area


def precision_at_recall(cells: LabeledCells, recall: float) -> float:
    """Наибольшая интерполированная точность кривой при заданном recall"""
    P, _ = _totals(cells)
    target = recall * P
    best = 0.0
    cum_p = 0
    cum_t = 0
    for p, n in cells.as_tuples():
        t = p + n
        if p == 0:
            if cum_p == target and cum_t + t > 0:
                best = max(best, cum_p / (cum_t + t))
        elif cum_p <= target <= cum_p + p:
            alpha = (target - cum_p) / p
            denom = cum_t + alpha * t
            best = max(best, p / t if denom == 0 else (cum_p + alpha * p) / denom)
        cum_p += p
        cum_t += t
    return best


def _evaluate(cells: LabeledCells, metric: OracleMetric, tolerance: float):
    if metric == OracleMetric.ROC:
        return roc_pair_count(cells)
    if metric == OracleMetric.AUPR:
        return aupr_numeric(cells, tolerance)
    return average_precision(cells)


def best_ordering_exhaustive(cells: LabeledCells, metric: OracleMetric,
                             budget: OracleBudget = DEFAULT_BUDGET) -> OrderingResult:
    """
    Перебирает все порядки ячеек и возвращает лучший для метрики.

    Каждый порядок: отдельный классификатор, присваивающий ячейкам
    различные оценки.

    Raises:
        OracleBudgetError: Ячеек больше budget.max_cells
    """
    metric = OracleMetric(metric)
    if len(cells) > budget.max_cells:
        raise OracleBudgetError(
            f"Ordering search over {len(cells)} cells exceeds the budget of {budget.max_cells}")
    _totals(cells)
    rows = cells.as_tuples()
    best_value = None
    best_order: List[Tuple[int, int]] = rows
    count = 0
    for order in set(itertools.permutations(rows)):
        count += 1
        value = _evaluate(LabeledCells.from_pairs(order), metric, budget.tolerance)
        if best_value is None or value > best_value or (value == best_value and list(order) < best_order):
            best_value = value
            best_order = list(order)

    oc = sort_cells(cells)
    if metric == OracleMetric.ROC:
        sorted_value = max_roc(oc)
    elif metric == OracleMetric.AUPR:
        sorted_value = max_aupr(oc)
    else:
        sorted_value = average_precision(oc.cells)
    best = float(best_value)
    logger.info("Exhaustive ordering search finished", metric=metric.value, cells=len(cells),
                orderings=count, best_value=best, sorted_value=sorted_value)
    return OrderingResult(
        metric=metric,
        best_value=best,
        best_order=best_order,
        sorted_value=sorted_value,
        sorted_is_optimal=sorted_value >= best - budget.tolerance,
        orderings=count,
    )
