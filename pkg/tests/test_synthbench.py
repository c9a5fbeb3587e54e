import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tss.core import EventAnnotation, Window
from tss.synthbench import (
    EVENT_TYPES,
    GeneratorConfig,
    InfeasibleInjectionError,
    bench_scaling,
    capture_report,
    event_coverage,
    event_examples,
    generate_synthetic,
    linear_r2,
    loglog_slope,
    median_by_size,
    write_bench_csv,
)


def win(sid, start, end):
    return Window(sid, start, start, end, np.zeros(end - start + 1))


ANN = [
    EventAnnotation("a", 10, 14, "evolving"),
    EventAnnotation("a", 40, 40, "surge_up"),
    EventAnnotation("b", 5, 6, "surge_down"),
    EventAnnotation("b", 60, 80, "out_of_bounds"),
]


class TestGenerator:
    def test_defaults(self, benchmark):
        d, ann = benchmark
        assert len(d) == 1000 and d.n == 500_000
        assert {len(s) for s in d} == {500}
        assert {a.event_type for a in ann} == set(EVENT_TYPES)

    def test_no_events(self):
        cfg = GeneratorConfig(n_series=5, rates={t: 0.0 for t in EVENT_TYPES})
        d, ann = generate_synthetic(cfg)
        assert ann == []
        t = np.arange(500)
        basis = np.column_stack([np.sin(2 * np.pi * t / cfg.period), np.cos(2 * np.pi * t / cfg.period)])
        for s in d:
            coef, *_ = np.linalg.lstsq(basis, s.values, rcond=None)
            assert np.hypot(*coef) == pytest.approx(cfg.amplitude, abs=0.02)
            assert np.abs(s.values - basis @ coef).max() < 6 * cfg.noise_sigma

    def test_deterministic(self):
        cfg = GeneratorConfig(n_series=30, seed=11)
        (d1, a1), (d2, a2) = generate_synthetic(cfg), generate_synthetic(cfg)
        assert d1.flat_values.tobytes() == d2.flat_values.tobytes()
        assert a1 == a2
        d3, a3 = generate_synthetic(cfg, threads=4)
        assert d3.flat_values.tobytes() == d1.flat_values.tobytes() and a3 == a1

    def test_seed_changes_data(self):
        a = generate_synthetic(GeneratorConfig(n_series=3, seed=1))[0]
        b = generate_synthetic(GeneratorConfig(n_series=3, seed=2))[0]
        assert a.flat_values.tobytes() != b.flat_values.tobytes()

    def test_annotations_disjoint_and_in_range(self, benchmark):
        d, ann = benchmark
        by = {}
        for a in ann:
            assert 0 <= a.start <= a.end < len(d.get(a.series_id))
            by.setdefault(a.series_id, []).append(a)
        for items in by.values():
            items.sort(key=lambda a: a.start)
            for x, y in zip(items, items[1:]):
                assert x.end < y.start

    def test_out_of_bounds_crosses_norm(self, benchmark):
        d, ann = benchmark
        cfg = GeneratorConfig()
        for a in ann:
            if a.event_type == "out_of_bounds":
                seg = d.get(a.series_id).values[a.start : a.end + 1]
                assert seg.max() > cfg.norm_high or seg.min() < cfg.norm_low

    def test_surge_polarity(self, benchmark):
        d, ann = benchmark
        for a in ann[:400]:
            if a.event_type in ("surge_up", "surge_down"):
                v = d.get(a.series_id).values
                neighbours = (v[a.start - 1] + v[a.end + 1]) / 2
                delta = v[a.start : a.end + 1].mean() - neighbours
                assert (delta > 0) == (a.event_type == "surge_up")

    def test_invalid_rate(self):
        with pytest.raises(ValueError, match="rates.surge_up"):
            GeneratorConfig(rates={"surge_up": 1.5})

    def test_infeasible_injection(self):
        with pytest.raises(InfeasibleInjectionError):
            GeneratorConfig(length=60)

    def test_dict_round_trip(self):
        cfg = GeneratorConfig(n_series=4, seed=3)
        assert GeneratorConfig.from_dict(cfg.to_dict()) == cfg
        with pytest.raises(ValueError):
            GeneratorConfig.from_dict({"colour": 1})


class TestMetrics:
    def test_three_of_four(self):
        windows = [win("a", 0, 10), win("a", 38, 45), win("b", 0, 5)]
        assert event_coverage(windows, ANN) == 0.75

    def test_no_hits(self):
        windows = [win("a", 20, 30), win("c", 0, 100)]
        assert event_coverage(windows, ANN) == 0
        assert event_examples(windows, ANN) == 0

    def test_all_hits(self):
        windows = [win("a", 14, 20), win("a", 40, 41), win("b", 6, 9), win("b", 75, 90), win("a", 0, 10), win("b", 50, 60)]
        assert event_examples(windows, ANN) == 1.0

    def test_one_of_six(self):
        windows = [win("a", 40, 41)] + [win("c", 10 * i, 10 * i + 5) for i in range(5)]
        assert event_examples(windows, ANN) == pytest.approx(0.1667, abs=5e-5)

    def test_window_with_two_events_counts_once(self):
        windows = [win("b", 0, 100)]
        assert event_examples(windows, ANN) == 1.0
        report = capture_report(windows, ANN, method="x")
        assert report.per_type == {"evolving": 0, "out_of_bounds": 1, "surge_down": 1, "surge_up": 0}
        assert report.m == 1

    def test_errors(self):
        with pytest.raises(ValueError):
            event_coverage([win("a", 0, 1)], [])
        with pytest.raises(ValueError):
            event_examples([], ANN)

    spans = st.lists(st.tuples(st.sampled_from("abc"), st.integers(0, 90), st.integers(0, 15)), min_size=1, max_size=8)

    @given(spans, spans)
    def test_bounded_and_monotone(self, first, extra):
        w1 = [win(s, a, a + k) for s, a, k in first]
        w2 = w1 + [win(s, a, a + k) for s, a, k in extra]
        c1, c2 = event_coverage(w1, ANN), event_coverage(w2, ANN)
        assert 0 <= c1 <= c2 <= 1
        e1, e2 = event_examples(w1, ANN), event_examples(w2, ANN)
        assert 0 <= e1 <= 1 and 0 <= e2 <= 1
        # hits only grow as windows are added
        assert e2 * len(w2) >= e1 * len(w1)


def test_bench_scaling_rows(tmp_path):
    calls = []
    rows = bench_scaling([1000, 2000], {"noop": lambda d: calls.append(d.n)}, trials=2, seed=1)
    assert [(r.n, r.method, r.trial) for r in rows] == [(1000, "noop", 0), (1000, "noop", 1), (2000, "noop", 0), (2000, "noop", 1)]
    assert all(r.wall_ms >= 0 and r.peak_bytes >= 0 for r in rows)
    ns, wall, mem = median_by_size(rows, "noop")
    assert ns.tolist() == [1000, 2000]
    p = tmp_path / "bench.csv"
    write_bench_csv(rows, p)
    with open(p) as fh:
        out = list(csv.reader(fh))
    assert out[0] == ["n", "method", "trial", "wall_ms", "peak_bytes"] and len(out) == 5
    with pytest.raises(ValueError):
        bench_scaling([2000, 1000], {})


def test_fit_helpers():
    x = np.array([1e4, 1e5, 1e6])
    assert loglog_slope(x, 3 * x) == pytest.approx(1.0)
    assert loglog_slope(x, x**2) == pytest.approx(2.0)
    assert linear_r2(x, 5 * x + 7) == pytest.approx(1.0)
    assert linear_r2(x, np.array([1.0, 100.0, 2.0])) < 0.5
