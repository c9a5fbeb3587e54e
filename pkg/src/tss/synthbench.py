"""Annotated synthetic benchmark, event-capture metrics and scaling runs.

Each generated series is a noisy sinusoid carrying at most one event of
each type:

* ``evolving``: a gradual rise and fall back to the base signal.
* ``surge_up`` / ``surge_down``: a spike of a few points.
* ``out_of_bounds``: a sustained excursion beyond ``norm_high`` or below
  ``norm_low``, entered and left over ``oob_ramp`` points.

Events in one series never overlap and keep ``min_separation`` free points
between them.
"""

from __future__ import annotations

import csv
import gc
import logging
import time
import tracemalloc
from collections import defaultdict
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .core import Dataset, EventAnnotation, Series, Window

logger = logging.getLogger(__name__)

EVENT_TYPES = ("evolving", "surge_up", "surge_down", "out_of_bounds")


class InfeasibleInjectionError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorConfig:
    n_series: int = 1000
    length: int = 500
    period: float = 100.0
    amplitude: float = 1.0
    noise_sigma: float = 0.05
    norm_high: float = 3.0
    norm_low: float = -3.0
    rates: dict = field(default_factory=lambda: {t: 0.25 for t in EVENT_TYPES})
    evolving_duration: tuple = (12, 16)
    evolving_magnitude: tuple = (1.6, 2.0)
    surge_width: tuple = (1, 2)
    surge_magnitude: tuple = (1.2, 1.6)
    oob_duration: tuple = (15, 25)
    oob_ramp: int = 30
    oob_margin: tuple = (0.5, 1.0)
    min_separation: int = 12
    edge_margin: int = 12
    seed: int = 7

    def __post_init__(self):
        if self.n_series < 1:
            raise ValueError("n_series must be >= 1")
        if self.length < 2:
            raise ValueError("length must be >= 2")
        if self.period <= 0:
            raise ValueError("period must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if not self.norm_low < self.norm_high:
            raise ValueError("norm_low must be below norm_high")
        unknown = set(self.rates) - set(EVENT_TYPES)
        if unknown:
            raise ValueError(f"rates: unknown event types {sorted(unknown)}")
        for name, rate in self.rates.items():
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"rates.{name}: {rate} is outside [0, 1]")
        for name in ("evolving_duration", "evolving_magnitude", "surge_width", "surge_magnitude",
                     "oob_duration", "oob_margin"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 0:
                raise ValueError(f"{name}: expected 0 <= low <= high, got {(lo, hi)}")
        if self.surge_width[0] < 1 or self.evolving_duration[0] < 2 or self.oob_duration[0] < 1:
            raise ValueError("event durations must be positive")
        if self.oob_ramp < 0 or self.min_separation < 0 or self.edge_margin < 0:
            raise ValueError("oob_ramp, min_separation and edge_margin must be non-negative")
        # worst case: every type fires at maximal duration in one series
        need = 2 * self.edge_margin + self.min_separation * (len(EVENT_TYPES) - 1)
        need += self.evolving_duration[1] + 2 * self.surge_width[1] + self.oob_duration[1] + 2 * self.oob_ramp
        if any(r > 0 for r in self.rates.values()) and need > self.length:
            raise InfeasibleInjectionError(
                f"events need up to {need} points per series but length is {self.length}"
            )

    def rate(self, event_type: str) -> float:
        return float(self.rates.get(event_type, 0.0))

    def to_dict(self) -> dict:
        out = asdict(self)
        for k, v in out.items():
            if isinstance(v, tuple):
                out[k] = list(v)
        out["rates"] = {t: self.rate(t) for t in EVENT_TYPES}
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "GeneratorConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(raw) - names
        if unknown:
            raise ValueError(f"unknown generator keys {sorted(unknown)}")
        kw = {}
        for k, v in raw.items():
            kw[k] = tuple(v) if isinstance(v, list) else v
        if "rates" in kw:
            kw["rates"] = {**{t: 0.0 for t in EVENT_TYPES}, **kw["rates"]}
        return cls(**kw)


def _place(rng: np.random.Generator, taken: list[tuple[int, int]], dur: int, cfg: GeneratorConfig):
    """Uniform start for a ``dur``-point event among all free positions."""
    lo, hi = cfg.edge_margin, cfg.length - cfg.edge_margin - dur
    if hi < lo:
        return None
    ok = np.ones(hi - lo + 1, dtype=bool)
    sep = cfg.min_separation
    for s, e in taken:
        # start in (s - sep - dur, e + sep] would violate separation
        a = max(s - sep - dur + 1, lo)
        b = min(e + sep, hi)
        if a <= b:
            ok[a - lo : b - lo + 1] = False
    free = np.flatnonzero(ok)
    if free.size == 0:
        return None
    return int(lo + free[rng.integers(free.size)])


def _uniform(rng, bounds):
    lo, hi = bounds
    return float(rng.uniform(lo, hi)) if hi > lo else float(lo)


def _int_uniform(rng, bounds):
    lo, hi = bounds
    return int(rng.integers(lo, hi + 1))


def _generate_one(sid: str, ss: np.random.SeedSequence, cfg: GeneratorConfig):
    rng = np.random.default_rng(ss)
    t = np.arange(cfg.length, dtype=np.float64)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    y = cfg.amplitude * np.sin(2.0 * np.pi * t / cfg.period + phase)
    y = y + rng.normal(0.0, cfg.noise_sigma, cfg.length)
    taken: list[tuple[int, int]] = []
    anns = []
    order = rng.permutation(len(EVENT_TYPES))
    for k in order:
        etype = EVENT_TYPES[k]
        if rng.random() >= cfg.rate(etype):
            continue
        if etype == "evolving":
            dur = _int_uniform(rng, cfg.evolving_duration)
        elif etype == "out_of_bounds":
            dur = _int_uniform(rng, cfg.oob_duration) + 2 * cfg.oob_ramp
        else:
            dur = _int_uniform(rng, cfg.surge_width)
        start = _place(rng, taken, dur, cfg)
        if start is None:
            raise InfeasibleInjectionError(f"no room for a {etype} event of {dur} points in series {sid}")
        end = start + dur - 1
        span = slice(start, end + 1)
        if etype == "evolving":
            mag = _uniform(rng, cfg.evolving_magnitude)
            up = (dur + 1) // 2
            ramp = np.concatenate([np.linspace(0.0, 1.0, up + 1)[1:], np.linspace(1.0, 0.0, dur - up + 1)[1:]])
            y[span] += mag * ramp
        elif etype == "surge_up":
            y[span] += _uniform(rng, cfg.surge_magnitude)
        elif etype == "surge_down":
            y[span] -= _uniform(rng, cfg.surge_magnitude)
        else:
            margin = _uniform(rng, cfg.oob_margin)
            level = cfg.norm_high + margin if rng.random() < 0.5 else cfg.norm_low - margin
            r = cfg.oob_ramp
            env = np.ones(dur)
            if r:
                edge = np.arange(1, r + 1) / (r + 1)
                env[:r], env[dur - r :] = edge, edge[::-1]
            target = level + rng.normal(0.0, cfg.noise_sigma, dur)
            y[span] = (1.0 - env) * y[span] + env * target
        taken.append((start, end))
        anns.append(EventAnnotation(sid, start, end, etype))
    anns.sort(key=lambda a: a.start)
    return Series(sid, y), anns


def series_ids(n: int) -> list[str]:
    width = max(4, len(str(n - 1)))
    return [f"s{i:0{width}d}" for i in range(n)]


def generate_synthetic(cfg: GeneratorConfig, threads: int = 1) -> tuple[Dataset, list[EventAnnotation]]:
    """Deterministic per ``cfg.seed``; each series draws from its own child seed."""
    ids = series_ids(cfg.n_series)
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.n_series)
    jobs = list(zip(ids, children))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda j: _generate_one(j[0], j[1], cfg), jobs))
    else:
        results = [_generate_one(sid, ss, cfg) for sid, ss in jobs]
    annotations = [a for _, anns in results for a in anns]
    return Dataset(tuple(s for s, _ in results)), annotations


# -- event capture ----------------------------------------------------------


def _by_series(annotations: Iterable[EventAnnotation]) -> dict[str, list[EventAnnotation]]:
    out = defaultdict(list)
    for a in annotations:
        out[a.series_id].append(a)
    return out


def _hits(window: Window, index: dict[str, list[EventAnnotation]]) -> list[EventAnnotation]:
    return [a for a in index.get(window.series_id, ()) if a.start <= window.end and window.start <= a.end]


def _windows(summary) -> list[Window]:
    return list(summary.windows) if hasattr(summary, "windows") else list(summary)


def event_coverage(summary, annotations: Sequence[EventAnnotation]) -> float:
    """Share of annotated event types touched by at least one window."""
    if not annotations:
        raise ValueError("event_coverage needs at least one annotation")
    index = _by_series(annotations)
    types = {a.event_type for a in annotations}
    hit = {a.event_type for w in _windows(summary) for a in _hits(w, index)}
    return len(hit) / len(types)


def event_examples(summary, annotations: Sequence[EventAnnotation]) -> float:
    """Share of windows touching at least one annotated event."""
    windows = _windows(summary)
    if not windows:
        raise ValueError("event_examples needs a non-empty summary")
    index = _by_series(annotations)
    return sum(1 for w in windows if _hits(w, index)) / len(windows)


@dataclass
class CaptureReport:
    event_coverage: float
    event_examples: float
    per_type: dict[str, int]
    m: int
    method: str = ""

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "m": self.m,
            "event_coverage": self.event_coverage,
            "event_examples": self.event_examples,
            "per_type": dict(self.per_type),
        }


def capture_report(summary, annotations: Sequence[EventAnnotation], method: str = "") -> CaptureReport:
    windows = _windows(summary)
    index = _by_series(annotations)
    per_type = {t: 0 for t in sorted({a.event_type for a in annotations})}
    for w in windows:
        for t in {a.event_type for a in _hits(w, index)}:
            per_type[t] += 1
    return CaptureReport(
        event_coverage(windows, annotations),
        event_examples(windows, annotations),
        per_type,
        len(windows),
        method or getattr(summary, "method", ""),
    )


# -- scaling ----------------------------------------------------------------

BENCH_COLUMNS = ("n", "method", "trial", "wall_ms", "peak_bytes")


@dataclass(frozen=True)
class BenchRow:
    n: int
    method: str
    trial: int
    wall_ms: float
    peak_bytes: int


def bench_dataset(n: int, seed: int = 0, length: int = 500) -> Dataset:
    """Benchmark input of roughly ``n`` points in series of ``length``."""
    n_series = max(1, round(n / length))
    cfg = GeneratorConfig(n_series=n_series, length=length, seed=seed)
    return generate_synthetic(cfg)[0]


def bench_scaling(
    sizes: Sequence[int],
    methods: dict[str, Callable[[Dataset], object]],
    trials: int = 1,
    seed: int = 0,
) -> list[BenchRow]:
    """Wall time and allocator high-water mark per (size, method, trial).

    Timing and memory come from two separate calls so the tracing overhead
    never lands in ``wall_ms``; ``peak_bytes`` is the tracemalloc peak above
    the footprint held before the call.
    """
    if list(sizes) != sorted(sizes):
        raise ValueError("sizes must be ascending")
    rows = []
    for n in sizes:
        data = bench_dataset(n, seed=seed)
        for name, run in methods.items():
            for trial in range(trials):
                gc.collect()
                t0 = time.perf_counter()
                run(data)
                wall_ms = (time.perf_counter() - t0) * 1e3
                gc.collect()
                tracemalloc.start()
                base, _ = tracemalloc.get_traced_memory()
                run(data)
                _, peak = tracemalloc.get_traced_memory()
                tracemalloc.stop()
                rows.append(BenchRow(data.n, name, trial, wall_ms, int(peak - base)))
                logger.info("bench n=%d %s trial %d: %.1f ms, %d bytes", data.n, name, trial, wall_ms, peak - base)
    return rows


def median_by_size(rows: Sequence[BenchRow], method: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-size medians of wall time and peak memory for one method."""
    groups = defaultdict(list)
    for r in rows:
        if r.method == method:
            groups[r.n].append(r)
    ns = np.array(sorted(groups), dtype=np.float64)
    wall = np.array([np.median([r.wall_ms for r in groups[n]]) for n in sorted(groups)])
    mem = np.array([np.median([r.peak_bytes for r in groups[n]]) for n in sorted(groups)])
    return ns, wall, mem


def loglog_slope(x, y) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx, ly = np.log(np.asarray(x, dtype=np.float64)), np.log(np.asarray(y, dtype=np.float64))
    return float(np.polyfit(lx, ly, 1)[0])


def linear_r2(x, y) -> float:
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    return 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0


def write_bench_csv(rows: Iterable[BenchRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BENCH_COLUMNS)
        for r in rows:
            writer.writerow((r.n, r.method, r.trial, f"{r.wall_ms:.3f}", r.peak_bytes))
