"""
Тесты процедуры оценки границ: удаление рёбер, уровни k, агрегирование.
"""
import math

import networkx as nx
import numpy as np
import pytest
from pydantic import ValidationError

from app.models.experiment import ExperimentConfig, LevelBounds, TrialResult, Verdict
from app.models.metrics import LabeledCells
from app.services.experiment import (
    DOWNSAMPLE_STREAM,
    compare_reported,
    confidence_interval,
    derive_trial_rng,
    remove_edges,
    run_experiment,
    run_trial,
    summarize,
)
from app.services.graph_core import without_edges
from app.services.metrics import bound_report
from app.services.partition import global_orbit_partition, label_cells
from app.utils.edge_list import load_edge_list
from app.utils.errors import DegenerateTrialError, InputError
from tests.conftest import KITE_EDGE_LIST, kite_positive_ids, graph_from_edges, graph_from_networkx


@pytest.fixture
def florentine():
    return graph_from_networkx(nx.florentine_families_graph())


class TestExperimentConfig:
    """Тесты конфигурации эксперимента"""

    def test_defaults(self):
        """Тест значений по умолчанию"""
        cfg = ExperimentConfig()
        assert cfg.removal_prob == 0.1
        assert cfg.trials == 10
        assert cfg.stop_epsilon == 0.005
        assert cfg.downsample is None

    @pytest.mark.parametrize("field,value", [
        ("removal_prob", 0.0),
        ("removal_prob", 1.0),
        ("trials", 0),
        ("master_seed", -1),
        ("master_seed", 2 ** 64),
        ("stop_epsilon", -0.1),
        ("downsample", 0.0),
    ])
    def test_invalid_values(self, field, value):
        """Тест ограничений полей"""
        with pytest.raises(ValidationError):
            ExperimentConfig(**{field: value})

    def test_unknown_field(self):
        """Тест: лишние поля запрещены"""
        with pytest.raises(ValidationError):
            ExperimentConfig(removal_probability=0.2)


class TestRemoval:
    """Тесты удаления рёбер и потоков случайности"""

    def test_partition_law(self, florentine):
        """Тест: позитивы и рёбра H разбивают E"""
        rng = derive_trial_rng(7, 0)
        h, positives = remove_edges(florentine, 0.3, rng)
        assert set(positives) | set(h.edges) == set(florentine.edges)
        assert not set(positives) & set(h.edges)
        assert positives == sorted(positives)

    def test_replay(self, florentine):
        """Тест: тот же seed даёт то же удаление"""
        first = remove_edges(florentine, 0.3, derive_trial_rng(7, 3))[1]
        second = remove_edges(florentine, 0.3, derive_trial_rng(7, 3))[1]
        assert first == second

    def test_streams_independent(self):
        """Тест: потоки испытаний и прореживания различаются"""
        a = derive_trial_rng(7, 0).random(4)
        b = derive_trial_rng(7, 1).random(4)
        c = derive_trial_rng(7, 0, stream=DOWNSAMPLE_STREAM).random(4)
        d = derive_trial_rng(7, 0, redraw=1).random(4)
        assert not np.allclose(a, b)
        assert not np.allclose(a, c)
        assert not np.allclose(a, d)

    def test_removal_rate(self, florentine):
        """Тест: доля удалённых рёбер около p"""
        rng = np.random.default_rng(0)
        removed = [len(remove_edges(florentine, 0.25, rng)[1]) for _ in range(2000)]
        assert np.mean(removed) / florentine.num_edges == pytest.approx(0.25, abs=0.01)

    def test_invalid_probability(self, florentine):
        """Тест вероятности вне (0, 1)"""
        with pytest.raises(InputError):
            remove_edges(florentine, 1.0, np.random.default_rng(0))


class TestKitePipeline:
    """Сквозной пример на графе kite: граф, удалённые рёбра, ячейки, границы"""

    def test_bounds(self):
        """Тест: |Aut| = 8, орбиты {4, 4}, ячейки [(2,2), (1,3)], ROC 19/30"""
        h = load_edge_list(KITE_EDGE_LIST, directed=False)
        positives = kite_positive_ids(h)
        g = graph_from_edges(h.n, list(h.edges) + positives)
        assert without_edges(g, positives).edges == h.edges

        part = global_orbit_partition(h)
        assert part.block_sizes().tolist() == [4, 4]
        cells = label_cells(part, positives)
        assert cells.as_tuples() == [(2, 2), (1, 3)]
        report = bound_report(cells)
        assert report.max_roc == pytest.approx(19 / 30)
        assert report.max_aupr == pytest.approx(1 / 3 + (1 / 12) * (1 + math.log(2)))


class TestRunTrial:
    """Тесты одного испытания"""

    def test_monotone_in_k(self, florentine):
        """Тест: граница AUPR не убывает по k и не превышает глобальную"""
        cfg = ExperimentConfig(removal_prob=0.2, master_seed=3, k_max=4, stop_epsilon=0.0)
        for trial in range(3):
            result = run_trial(florentine, cfg, trial)
            assert result.monotone
            values = [lv.report.max_aupr for lv in result.per_k] + [result.global_bounds.report.max_aupr]
            for lower, upper in zip(values, values[1:]):
                assert lower <= upper + 1e-12
            blocks = [lv.blocks for lv in result.per_k] + [result.global_bounds.blocks]
            assert blocks == sorted(blocks)

    def test_replay_identical(self, florentine):
        """Тест: повтор испытания даёт тот же результат"""
        cfg = ExperimentConfig(removal_prob=0.2, master_seed=11, k_max=2, downsample=1.0)
        first = run_trial(florentine, cfg, 1)
        second = run_trial(florentine, cfg, 1)
        assert first.model_dump() == second.model_dump()

    def test_counts(self, florentine):
        """Тест: позитивы и негативы покрывают не-рёбра H"""
        cfg = ExperimentConfig(removal_prob=0.2, master_seed=5, k_max=1)
        result = run_trial(florentine, cfg, 0)
        total_pairs = florentine.n * (florentine.n - 1) // 2
        h_edges = florentine.num_edges - result.positives
        assert result.positives + result.negatives == total_pairs - h_edges
        assert result.global_bounds.report.positives == result.positives

    def test_stop_criterion(self, florentine):
        """Тест: при большом eps остановка на k = 1"""
        cfg = ExperimentConfig(removal_prob=0.2, master_seed=5, k_max=5, stop_epsilon=1.0)
        result = run_trial(florentine, cfg, 0)
        assert result.k_stop == 1
        assert len(result.per_k) == 1

    def test_global_only(self, florentine):
        """Тест: k_max = 0, только глобальная граница"""
        cfg = ExperimentConfig(removal_prob=0.2, k_max=0)
        result = run_trial(florentine, cfg, 0)
        assert result.per_k == []
        assert result.k_stop is None
        assert result.global_bounds.k is None
        assert result.downsample_dominates is None

    def test_downsampled_levels(self, florentine):
        """Тест: прореживание считается на каждом уровне"""
        cfg = ExperimentConfig(removal_prob=0.2, k_max=2, stop_epsilon=0.0, downsample=1.0)
        result = run_trial(florentine, cfg, 0)
        for level in result.per_k + [result.global_bounds]:
            assert level.downsampled is not None
            assert level.downsampled.negatives == level.downsampled.positives

    def test_degenerate_trial(self):
        """Тест: граф из одного ребра всегда вырожден"""
        g = graph_from_edges(3, [(0, 1)])
        cfg = ExperimentConfig(removal_prob=0.5, max_redraws=5)
        with pytest.raises(DegenerateTrialError):
            run_trial(g, cfg, 0)

    def test_redraws_recorded(self):
        """Тест: вырожденные попытки перевыбираются"""
        g = graph_from_edges(4, [(0, 1), (1, 2), (2, 3)])
        cfg = ExperimentConfig(removal_prob=0.05, max_redraws=500, k_max=1)
        result = run_trial(g, cfg, 0)
        assert result.positives >= 1
        assert result.redraws >= 0

    def test_timings_not_in_payload(self, florentine):
        """Тест: время стадий не попадает в сериализацию"""
        result = run_trial(florentine, ExperimentConfig(removal_prob=0.2, k_max=1), 0)
        assert result.timings_ms
        assert "timings_ms" not in result.model_dump()

    def test_downsampled_not_below_full(self, florentine):
        """Тест: прореживание негативов не понижает границ ни на одном уровне"""
        graphs = {
            "florentine": florentine,
            "karate": graph_from_networkx(nx.karate_club_graph()),
            "directed_gnp": graph_from_networkx(nx.gnp_random_graph(25, 0.15, seed=4, directed=True)),
        }
        cfg = ExperimentConfig(removal_prob=0.2, master_seed=8, k_max=2, stop_epsilon=0.0, downsample=1.0)
        for name, g in graphs.items():
            for trial in range(2):
                result = run_trial(g, cfg, trial)
                assert result.downsample_dominates is True, name
                for level in result.per_k + [result.global_bounds]:
                    full, sampled = level.report, level.downsampled
                    assert sampled.negatives <= full.negatives
                    assert sampled.max_aupr >= full.max_aupr - 1e-12, (name, level.k)
                    assert sampled.max_ap >= full.max_ap - 1e-12, (name, level.k)


class TestAggregation:
    """Тесты агрегирования испытаний"""

    def test_single_sample(self):
        """Тест: для одного значения полуширина не определена"""
        assert confidence_interval([0.5]) == (0.5, None)

    def test_two_samples(self):
        """Тест: 1.96 * s / sqrt(m)"""
        mean, halfwidth = confidence_interval([0.4, 0.6])
        assert mean == pytest.approx(0.5)
        assert halfwidth == pytest.approx(0.196, abs=1e-9)

    def test_empty(self):
        """Тест пустой выборки"""
        with pytest.raises(InputError):
            confidence_interval([])

    def test_coverage(self):
        """Тест: интервал накрывает истинное среднее примерно в 95% серий"""
        rng = np.random.default_rng(2024)
        runs, size, true_mean = 10_000, 40, 0.7
        samples = rng.normal(true_mean, 0.1, size=(runs, size))
        covered = 0
        for row in samples:
            mean, halfwidth = confidence_interval(row.tolist())
            covered += abs(mean - true_mean) <= halfwidth
        assert 0.93 <= covered / runs <= 0.955

    def test_one_trial_width_undefined(self, florentine):
        """Тест: одно испытание, width_defined=False"""
        summary = run_experiment(florentine, ExperimentConfig(removal_prob=0.2, trials=1, k_max=1), workers=1)
        assert summary.trials == 1
        assert not summary.global_.aupr.width_defined
        assert summary.global_.aupr.ci_halfwidth == 0.0

    def test_levels_aligned(self, florentine):
        """Тест: уровень k учитывает только дошедшие до него испытания"""
        cfg = ExperimentConfig(removal_prob=0.2, trials=3, k_max=3, master_seed=1)
        results = [run_trial(florentine, cfg, i) for i in range(cfg.trials)]
        summary = summarize(results)
        assert summary.k_stops == [r.k_stop for r in results]
        for level in summary.per_k:
            reached = [r.trial for r in results if any(lv.k == level.k for lv in r.per_k)]
            assert level.trials == reached
            assert len(level.aupr.samples) == len(level.trials)
        assert summary.global_.trials == [0, 1, 2]

    def test_alias_in_dump(self, florentine):
        """Тест: глобальный уровень сериализуется под ключом global"""
        summary = run_experiment(florentine, ExperimentConfig(removal_prob=0.2, trials=2, k_max=1), workers=1)
        dumped = summary.model_dump(by_alias=True)
        assert "global" in dumped
        assert "trial_results" not in dumped

    def test_workers_do_not_change_results(self, florentine):
        """Тест: результат не зависит от числа процессов"""
        cfg = ExperimentConfig(removal_prob=0.2, trials=3, k_max=2, master_seed=99, downsample=1.0)
        serial = run_experiment(florentine, cfg, workers=1)
        parallel = run_experiment(florentine, cfg, workers=2)
        assert serial.model_dump(by_alias=True) == parallel.model_dump(by_alias=True)


class TestCompareReported:
    """Тесты сравнения опубликованных метрик с границами"""

    @pytest.fixture
    def summary(self, florentine):
        cfg = ExperimentConfig(removal_prob=0.2, trials=3, k_max=0, master_seed=4, downsample=1.0)
        return run_experiment(florentine, cfg, workers=1)

    def test_below_bound(self, summary):
        """Тест: значение не выше границы"""
        low, equal = compare_reported(summary, {"roc": 0.0, "aupr": summary.global_.aupr.mean})
        assert low.verdict == Verdict.BELOW_BOUND
        assert equal.verdict == Verdict.BELOW_BOUND
        assert low.bound_mean == summary.global_.roc.mean

    def test_above_bound(self):
        """Тест: ROC 0.95 выше верхнего края ДИ при границах 19/30 и 3/4"""
        results = []
        for trial, rows in enumerate([[(2, 2), (1, 3)], [(3, 1), (1, 3)]]):
            report = bound_report(LabeledCells.from_pairs(rows))
            results.append(TrialResult(
                trial=trial, positives=report.positives, negatives=report.negatives, redraws=0,
                global_bounds=LevelBounds(blocks=len(rows), report=report),
            ))
        summary = summarize(results)
        roc = summary.global_.roc
        assert roc.mean == pytest.approx((19 / 30 + 3 / 4) / 2)
        assert roc.mean + roc.ci_halfwidth < 0.9

        (result,) = compare_reported(summary, {"roc": 0.95})
        assert result.verdict == Verdict.ABOVE_BOUND
        assert result.note is None

    def test_ap_above_bound_note(self, summary):
        """Тест: AP выше границы указывает на прореживание негативов"""
        bound = summary.global_.ap_bound
        (result,) = compare_reported(summary, {"ap": bound.mean + bound.ci_halfwidth + 1e-6})
        assert result.verdict == Verdict.ABOVE_BOUND
        assert "downsampled" in result.note

    def test_unknown_metric(self, summary):
        """Тест неизвестной метрики"""
        with pytest.raises(InputError):
            compare_reported(summary, {"f1": 0.5})
