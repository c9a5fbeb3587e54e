"""Diversity between candidate windows and the current summary.

``tw`` picks the candidate whose nearest selected window (by DTW) is
farthest away. ``critic`` picks the candidate whose utility score moves the
mean score of the summary the most.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numpy as np

from .core import Window

DIVERSITY_KINDS = ("tw", "critic")


def dtw_distance(a, b) -> float:
    """Unconstrained DTW with squared-difference local cost.

    Steps are match, insertion and deletion with unit weight; the value is
    the accumulated cost of the cheapest warping path from (0, 0) to
    (len(a) - 1, len(b) - 1).
    """
    x = np.asarray(a, dtype=np.float64).ravel()
    y = np.asarray(b, dtype=np.float64).ravel()
    if x.size == 0 or y.size == 0:
        raise ValueError("dtw_distance needs non-empty inputs")
    cost = np.subtract.outer(x, y)
    cost = (cost * cost).tolist()
    m = y.size
    inf = float("inf")
    prev = [inf] * (m + 1)
    prev[0] = 0.0
    for row in cost:
        cur = [inf] * (m + 1)
        left = inf
        for j in range(m):
            best = prev[j]
            if prev[j + 1] < best:
                best = prev[j + 1]
            if left < best:
                best = left
            left = row[j] + best
            cur[j + 1] = left
        cur[0] = inf
        prev = cur
    return prev[m]


def znormalize(values: np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    sd = v.std()
    if sd == 0:
        return v - v.mean()
    return (v - v.mean()) / sd


class DistanceCache:
    """Memoised DTW between windows keyed by (series_id, anchor).

    Candidates returned to a queue are seen again in later rounds; only
    pairs involving a newly selected window are computed fresh.
    """

    def __init__(self, transform: Callable[[np.ndarray], np.ndarray] | None = None):
        self.transform = transform
        self._dist: dict[tuple, float] = {}
        self._values: dict[tuple, np.ndarray] = {}

    def values(self, w: Window) -> np.ndarray:
        v = self._values.get(w.key)
        if v is None:
            v = np.asarray(w.values, dtype=np.float64)
            if self.transform is not None:
                v = self.transform(v)
            self._values[w.key] = v
        return v

    def missing(self, pairs):
        return [(c, v) for c, v in pairs if (c.key, v.key) not in self._dist]

    def fill(self, pairs, threads: int = 1) -> None:
        todo = self.missing(pairs)
        if not todo:
            return

        def run(pair):
            c, v = pair
            return dtw_distance(self.values(c), self.values(v))

        # prime value cache serially so workers only read it
        for c, v in todo:
            self.values(c)
            self.values(v)
        if threads > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(run, todo))
        else:
            results = [run(p) for p in todo]
        for (c, v), d in zip(todo, results):
            self._dist[(c.key, v.key)] = d

    def get(self, c: Window, v: Window) -> float:
        return self._dist[(c.key, v.key)]


class Pick(NamedTuple):
    index: int
    window: Window
    score: float


def _argmax_by_key(candidates: Sequence[Window], objective: Sequence[float]) -> int:
    best = None
    for i in sorted(range(len(candidates)), key=lambda i: candidates[i].key):
        if best is None or objective[i] > objective[best]:
            best = i
    return best


def distance_matrix(
    candidates: Sequence[Window], selected: Sequence[Window], cache: DistanceCache | None = None, threads: int = 1
) -> np.ndarray:
    """DTW costs, rows are candidates and columns selected windows."""
    cache = cache or DistanceCache()
    pairs = [(c, v) for c in candidates for v in selected]
    cache.fill(pairs, threads=threads)
    out = np.empty((len(candidates), len(selected)))
    for i, c in enumerate(candidates):
        for j, v in enumerate(selected):
            out[i, j] = cache.get(c, v)
    return out


def tw_diversity_pick(
    V: Sequence[Window], C: Sequence[Window], cache: DistanceCache | None = None, threads: int = 1
) -> Pick:
    """Candidate maximising its minimum DTW distance to ``V``."""
    if not V or not C:
        raise ValueError("tw_diversity_pick needs non-empty V and C")
    row_min = distance_matrix(C, V, cache=cache, threads=threads).min(axis=1)
    i = _argmax_by_key(C, row_min)
    return Pick(i, C[i], float(row_min[i]))


def critic_objective(selected_scores: Sequence[float], score: float) -> float:
    s = list(map(float, selected_scores))
    before = sum(s) / len(s)
    after = (sum(s) + float(score)) / (len(s) + 1)
    return abs(before - after)


def critic_diversity_pick(selected_scores: Sequence[float], C: Sequence[Window], candidate_scores: Sequence[float]) -> Pick:
    """Candidate whose score shifts the mean of ``selected_scores`` the most."""
    if len(selected_scores) == 0 or not C:
        raise ValueError("critic_diversity_pick needs non-empty V and C")
    if len(C) != len(candidate_scores):
        raise ValueError("one score per candidate is required")
    objective = [critic_objective(selected_scores, s) for s in candidate_scores]
    i = _argmax_by_key(C, objective)
    return Pick(i, C[i], objective[i])
