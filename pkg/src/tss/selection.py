"""Greedy summary construction and the random baseline."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .core import AnchorIndex, Dataset, Window, WindowSpec, enumerate_windows, overlaps_any
from .diversity import DIVERSITY_KINDS, DistanceCache, critic_diversity_pick, tw_diversity_pick, znormalize
from .utility import UtilityBucket, UtilityConfig, apply_feature_map, bucket_order, build_buckets

logger = logging.getLogger(__name__)

CRITIC_MEANS = ("bucket", "all")


class InfeasibleSummaryError(RuntimeError):
    """Queues ran dry before the summary reached its target size."""

    def __init__(self, message: str, partial: "Summary"):
        super().__init__(message)
        self.partial = partial
        self.achieved = len(partial.entries)


@dataclass(frozen=True)
class SelectionConfig:
    m: int
    m_c: int = 10
    m_p: int = 0
    diversity: str = "tw"
    seed: int = 0
    overlap_gap: int = 0
    znormalize: bool = False
    critic_mean: str = "bucket"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.m_c < 1:
            raise ValueError(f"m_c must be >= 1, got {self.m_c}")
        if self.m_p < 0:
            raise ValueError(f"m_p must be >= 0, got {self.m_p}")
        if self.overlap_gap < 0:
            raise ValueError(f"overlap_gap must be >= 0, got {self.overlap_gap}")
        if self.diversity not in DIVERSITY_KINDS:
            raise ValueError(f"diversity must be one of {DIVERSITY_KINDS}, got {self.diversity!r}")
        if self.critic_mean not in CRITIC_MEANS:
            raise ValueError(f"critic_mean must be one of {CRITIC_MEANS}, got {self.critic_mean!r}")


@dataclass(frozen=True)
class SummaryEntry:
    window: Window
    source: str
    utility_score: float | None
    diversity_score: float | None = None
    anchor_index: int | None = field(default=None, compare=False)


@dataclass
class Summary:
    entries: list[SummaryEntry] = field(default_factory=list)
    method: str = "insights"
    shortfall: int = 0

    @property
    def windows(self) -> list[Window]:
        return [e.window for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


class BucketQueue:
    """Descending-score queue over one bucket's anchors.

    Pops advance a cursor through the presorted order; anchors handed back
    with :meth:`add_back` are reinserted by their original rank.
    """

    def __init__(self, order: np.ndarray):
        self._order = np.asarray(order)
        self._rank = None
        self._pos = 0
        self._front: list[int] = []

    def _rank_of(self, anchor: int) -> int:
        if self._rank is None:
            self._rank = np.empty(self._order.size, dtype=np.int64)
            self._rank[self._order] = np.arange(self._order.size)
        return int(self._rank[anchor])

    def __len__(self) -> int:
        return len(self._front) + self._order.size - self._pos

    def __bool__(self) -> bool:
        return len(self) > 0

    def pop(self) -> int:
        if self._front:
            return self._front.pop(0)
        if self._pos >= self._order.size:
            raise IndexError("pop from an empty queue")
        a = int(self._order[self._pos])
        self._pos += 1
        return a

    def add_back(self, anchors: Sequence[int]) -> None:
        merged = set(self._front) | {int(a) for a in anchors}
        self._front = sorted(merged, key=self._rank_of)


def select_candidates(
    q: BucketQueue, m_c: int, V: Sequence[Window], anchors: AnchorIndex, gap: int = 0
) -> list[int]:
    """Pop up to ``m_c`` anchors whose windows do not overlap ``V``.

    Overlapping pops are dropped for good: ``V`` only grows.
    """
    out = []
    while q and len(out) < m_c:
        a = q.pop()
        if overlaps_any(anchors.window(a), V, gap):
            continue
        out.append(a)
    return out


def _window_transform(fn: UtilityConfig, use_znorm: bool):
    def transform(values):
        v = apply_feature_map(fn.feature_map, values)
        return znormalize(v) if use_znorm else v

    return transform


def append_prototypes(
    V: Summary,
    buckets: Sequence[UtilityBucket],
    m_p: int,
    m_c: int,
    d: AnchorIndex,
    gap: int = 0,
) -> Summary:
    """Append up to ``m_p`` windows of median importance from the top-rl bucket.

    Windows are ranked by distance of their score to the bucket median, then
    lower score, then anchor order, and taken greedily under the overlap
    rule. ``m_c`` is accepted for call compatibility and does not affect the
    choice.
    """
    if m_p <= 0:
        return V
    bucket = buckets[bucket_order(buckets)[0]]
    scores = bucket.scores
    dist = np.abs(scores - np.median(scores))
    ranked = np.lexsort((np.arange(scores.size), scores, dist))
    taken = list(V.windows)
    added = 0
    for a in ranked:
        if added == m_p:
            break
        w = d.window(int(a))
        if overlaps_any(w, taken, gap):
            continue
        taken.append(w)
        V.entries.append(SummaryEntry(w, "prototype", float(scores[a]), None, int(a)))
        added += 1
    V.shortfall = m_p - added
    if V.shortfall:
        logger.warning("only %d of %d prototypes fit without overlap", added, m_p)
    return V


def insights_select(
    d: Dataset,
    w: WindowSpec,
    fns: Sequence[UtilityConfig],
    cfg: SelectionConfig,
    threads: int = 1,
    buckets: Sequence[UtilityBucket] | None = None,
) -> Summary:
    """Greedy summary of ``cfg.m`` windows plus ``cfg.m_p`` prototypes.

    Round one takes the top window of the highest-rl bucket. Every later
    round moves to the next bucket (cyclically, in rl order), draws up to
    ``m_c`` non-overlapping candidates from its queue, keeps the most
    diverse one and hands the rest back to the queue.
    """
    anchors = enumerate_windows(d, w)
    if len(anchors) == 0:
        raise ValueError("dataset has no valid window anchors for this window spec")
    if buckets is None:
        buckets = build_buckets(anchors, None, fns, threads=threads)
    order = bucket_order(buckets)
    queues = [BucketQueue(b.queue) for b in buckets]
    transforms = [_window_transform(fn, cfg.znormalize) for fn in fns]
    caches = [DistanceCache(t) for t in transforms]
    gap = cfg.overlap_gap

    summary = Summary(method=f"insights-{cfg.diversity}")
    selected: list[Window] = []
    chosen: list[int] = []
    cursor = 0
    idle = 0
    while len(selected) < cfg.m:
        bi = order[cursor % len(order)]
        cursor += 1
        bucket, q = buckets[bi], queues[bi]
        if not selected:
            a = q.pop()
            entry = SummaryEntry(anchors.window(a), bucket.function_id, float(bucket.scores[a]), None, a)
        else:
            cand = select_candidates(q, cfg.m_c, selected, anchors, gap)
            if not cand:
                idle += 1
                if idle >= len(order):
                    raise InfeasibleSummaryError(
                        f"queues exhausted after {len(selected)} of {cfg.m} windows", summary
                    )
                continue
            cand_windows = [anchors.window(a) for a in cand]
            if cfg.diversity == "tw":
                pick = tw_diversity_pick(selected, cand_windows, cache=caches[bi], threads=threads)
            else:
                if cfg.critic_mean == "bucket":
                    v_scores = [bucket.scores[c] for c in chosen]
                else:
                    v_scores = [b.scores[c] for b in buckets for c in chosen]
                pick = critic_diversity_pick(v_scores, cand_windows, [bucket.scores[c] for c in cand])
            a = cand[pick.index]
            q.add_back([c for c in cand if c != a])
            entry = SummaryEntry(pick.window, bucket.function_id, float(bucket.scores[a]), pick.score, a)
        idle = 0
        summary.entries.append(entry)
        selected.append(entry.window)
        chosen.append(entry.anchor_index)

    return append_prototypes(summary, buckets, cfg.m_p, cfg.m_c, anchors, gap)


def random_select(d: Dataset, w: WindowSpec, cfg: SelectionConfig) -> Summary:
    """``cfg.m`` uniformly drawn, pairwise non-overlapping windows."""
    anchors = enumerate_windows(d, w)
    rng = np.random.default_rng(cfg.seed)
    summary = Summary(method="random")
    selected: list[Window] = []
    n = len(anchors)
    tried: set[int] = set()
    # rejection sampling over anchor ids; falls back to a full permutation
    # once collisions make it wasteful
    while len(selected) < cfg.m and len(tried) < n:
        if len(tried) > n // 2:
            rest = np.setdiff1d(np.arange(n), np.fromiter(tried, dtype=np.int64))
            for a in rng.permutation(rest):
                if len(selected) == cfg.m:
                    break
                wa = anchors.window(int(a))
                if not overlaps_any(wa, selected, cfg.overlap_gap):
                    selected.append(wa)
                    summary.entries.append(SummaryEntry(wa, "random", None, None, int(a)))
            break
        a = int(rng.integers(n))
        if a in tried:
            continue
        tried.add(a)
        wa = anchors.window(a)
        if overlaps_any(wa, selected, cfg.overlap_gap):
            continue
        selected.append(wa)
        summary.entries.append(SummaryEntry(wa, "random", None, None, a))
    if len(selected) < cfg.m:
        raise InfeasibleSummaryError(f"only {len(selected)} of {cfg.m} non-overlapping windows exist", summary)
    return summary
