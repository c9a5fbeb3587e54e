"""Series, windows and annotations, plus long-CSV ingestion.

All positions are integer steps on an implicit, unit-free time index that
starts at 0 for every series.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DATASET_COLUMNS = ("series_id", "t", "value")
ANNOTATION_COLUMNS = ("series_id", "start", "end", "event_type")
# Tolerated extra column; dropped once t has been validated.
IGNORED_COLUMNS = ("timestamp",)


class DatasetError(ValueError):
    """Base class for ingestion failures. ``row`` is the 1-based file line."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class MissingColumnError(DatasetError):
    pass


class MultivariateInputError(DatasetError):
    pass


class NonContiguousIndexError(DatasetError):
    pass


class NonFiniteValueError(DatasetError):
    pass


class DuplicateIndexError(DatasetError):
    pass


class MalformedRowError(DatasetError):
    pass


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Series:
    id: str
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        if self.values.ndim != 1:
            raise MultivariateInputError(f"series {self.id!r} is not univariate")
        if self.values.size == 0:
            raise DatasetError(f"series {self.id!r} is empty")
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteValueError(f"series {self.id!r} has non-finite values")

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable collection of univariate series, ordered by id."""

    series: tuple[Series, ...]
    _flat: np.ndarray = field(init=False, repr=False, compare=False)
    _offsets: np.ndarray = field(init=False, repr=False, compare=False)
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        series = tuple(sorted(self.series, key=lambda s: s.id))
        ids = [s.id for s in series]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise DatasetError(f"duplicate series id {dup!r}")
        object.__setattr__(self, "series", series)
        lengths = np.array([len(s) for s in series], dtype=np.int64)
        offsets = np.zeros(len(series) + 1, dtype=np.int64)
        np.cumsum(lengths, out=offsets[1:])
        offsets.setflags(write=False)
        flat = _frozen(np.concatenate([s.values for s in series])) if series else _frozen([])
        object.__setattr__(self, "_flat", flat)
        object.__setattr__(self, "_offsets", offsets)
        object.__setattr__(self, "_by_id", {s.id: k for k, s in enumerate(series)})

    @classmethod
    def from_arrays(cls, arrays: dict[str, Sequence[float]]) -> "Dataset":
        return cls(tuple(Series(k, v) for k, v in arrays.items()))

    @property
    def n(self) -> int:
        """Total number of points over all series."""
        return int(self._offsets[-1])

    @property
    def flat_values(self) -> np.ndarray:
        """All values concatenated in series order (read-only)."""
        return self._flat

    @property
    def offsets(self) -> np.ndarray:
        """``offsets[i]`` is the flat position of point 0 of series ``i``."""
        return self._offsets

    def index_of(self, series_id: str) -> int:
        return self._by_id[series_id]

    def get(self, series_id: str) -> Series:
        return self.series[self._by_id[series_id]]

    def __len__(self) -> int:
        return len(self.series)

    def __iter__(self):
        return iter(self.series)


@dataclass(frozen=True)
class WindowSpec:
    """Window of ``l + 1`` points: ``b`` before the anchor, ``l - b`` after."""

    b: int
    l: int

    def __post_init__(self):
        if isinstance(self.b, bool) or not isinstance(self.b, (int, np.integer)) or self.b < 0:
            raise ValueError(f"b must be a non-negative integer, got {self.b!r}")
        if isinstance(self.l, bool) or not isinstance(self.l, (int, np.integer)) or self.l < 1:
            raise ValueError(f"l must be a positive integer, got {self.l!r}")
        if self.b > self.l:
            raise ValueError(f"b ({self.b}) must not exceed l ({self.l})")

    @property
    def length(self) -> int:
        return self.l + 1

    @property
    def after(self) -> int:
        return self.l - self.b

    def is_valid(self, t: int, n_i: int) -> bool:
        return t - self.b >= 0 and t + self.after <= n_i - 1


@dataclass(frozen=True)
class Window:
    series_id: str
    anchor: int
    start: int
    end: int
    values: np.ndarray = field(compare=False, repr=False)

    @property
    def key(self) -> tuple[str, int]:
        """Deterministic tie-break key."""
        return (self.series_id, self.anchor)

    def __len__(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class EventAnnotation:
    series_id: str
    start: int
    end: int
    event_type: str

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"annotation start {self.start} > end {self.end}")
        if self.start < 0:
            raise ValueError(f"annotation start {self.start} < 0")


class AnchorIndex(Sequence):
    """Every valid anchor of a dataset, in (series, t) order.

    Anchor ``k`` is identified by its position; ``series_index[k]``, ``t[k]``
    and ``flat_start[k]`` are parallel int arrays.
    """

    def __init__(self, dataset: Dataset, spec: WindowSpec):
        self.dataset = dataset
        self.spec = spec
        lengths = np.diff(dataset.offsets)
        counts = np.maximum(lengths - spec.l, 0)
        total = int(counts.sum())
        self.series_index = np.repeat(np.arange(len(dataset), dtype=np.int64), counts)
        # t runs b .. n_i - 1 - (l - b) within each series
        first = np.zeros(len(counts) + 1, dtype=np.int64)
        np.cumsum(counts, out=first[1:])
        local = np.arange(total, dtype=np.int64) - np.repeat(first[:-1], counts)
        self.t = local + spec.b
        self.flat_start = dataset.offsets[:-1][self.series_index] + local
        for arr in (self.series_index, self.t, self.flat_start):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return self.t.size

    def __getitem__(self, k):
        if isinstance(k, slice):
            return [self[i] for i in range(*k.indices(len(self)))]
        return (self.dataset.series[int(self.series_index[k])].id, int(self.t[k]))

    def window(self, k: int) -> Window:
        spec = self.spec
        s = int(self.series_index[k])
        t = int(self.t[k])
        fs = int(self.flat_start[k])
        values = self.dataset.flat_values[fs : fs + spec.length]
        return Window(self.dataset.series[s].id, t, t - spec.b, t + spec.after, values)

    def window_matrix(self, ks: np.ndarray | slice | None = None) -> np.ndarray:
        """Window values as a ``(len(ks), l + 1)`` array (a copy)."""
        starts = self.flat_start if ks is None else self.flat_start[ks]
        view = np.lib.stride_tricks.sliding_window_view(self.dataset.flat_values, self.spec.length)
        return view[starts]


def enumerate_windows(d: Dataset, w: WindowSpec) -> AnchorIndex:
    return AnchorIndex(d, w)


def make_window(d: Dataset, w: WindowSpec, series_id: str, t: int) -> Window:
    series = d.get(series_id)
    if not w.is_valid(t, len(series)):
        raise ValueError(f"anchor {t} is not valid on series {series_id!r} for {w}")
    values = series.values[t - w.b : t + w.after + 1]
    return Window(series_id, t, t - w.b, t + w.after, values)


def windows_overlap(a: Window, b: Window, gap: int = 0) -> bool:
    """True iff both windows sit on one series and share an index.

    With ``gap > 0`` windows closer than ``gap`` free points apart also count
    as overlapping.
    """
    if a.series_id != b.series_id:
        return False
    return a.start <= b.end + gap and b.start <= a.end + gap


def overlaps_any(w: Window, others: Iterable[Window], gap: int = 0) -> bool:
    return any(windows_overlap(w, o, gap) for o in others)


def _read_rows(path: Path, required: Sequence[str]):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumnError(f"{path} is empty", row=1) from None
        header = [h.strip() for h in header]
        for col in required:
            if col not in header:
                raise MissingColumnError(f"missing column {col!r}", row=1)
        extra = [h for h in header if h not in required and h not in IGNORED_COLUMNS]
        cols = [header.index(c) for c in required]
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise MalformedRowError(f"expected {len(header)} fields, got {len(row)}", row=lineno)
            yield lineno, [row[c] for c in cols], extra


def load_dataset(path: str | Path, format: str = "long-csv") -> Dataset:
    """Read a ``series_id,t,value`` CSV and validate it.

    Rows may arrive in any order; within each series ``t`` must cover
    0..n_i-1 exactly once.
    """
    if format != "long-csv":
        raise ValueError(f"unsupported format {format!r}")
    path = Path(path)
    per_series: dict[str, dict[int, tuple[float, int]]] = {}
    for lineno, (sid, t_raw, v_raw), extra in _read_rows(path, DATASET_COLUMNS):
        if extra:
            raise MultivariateInputError(f"unexpected value columns {extra}; only univariate input is supported", row=1)
        try:
            t = int(t_raw)
        except ValueError:
            raise MalformedRowError(f"t={t_raw!r} is not an integer", row=lineno) from None
        try:
            v = float(v_raw)
        except ValueError:
            raise MalformedRowError(f"value={v_raw!r} is not a number", row=lineno) from None
        if not math.isfinite(v):
            raise NonFiniteValueError(f"non-finite value {v_raw!r} (series {sid!r}, t={t})", row=lineno)
        points = per_series.setdefault(sid, {})
        if t in points:
            raise DuplicateIndexError(
                f"duplicate (series_id, t) = ({sid!r}, {t}); first seen on row {points[t][1]}", row=lineno
            )
        points[t] = (v, lineno)

    series = []
    for sid, points in per_series.items():
        ts = sorted(points)
        for expected, t in enumerate(ts):
            if t != expected:
                raise NonContiguousIndexError(
                    f"series {sid!r}: t jumps to {t}, expected {expected}", row=points[t][1]
                )
        series.append(Series(sid, [points[t][0] for t in ts]))
    return Dataset(tuple(series))


def write_dataset(d: Dataset, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DATASET_COLUMNS)
        for s in d.series:
            sid = s.id
            writer.writerows((sid, t, repr(v)) for t, v in enumerate(s.values.tolist()))


def load_annotations(path: str | Path, dataset: Dataset | None = None) -> list[EventAnnotation]:
    out = []
    for lineno, (sid, start, end, etype), _ in _read_rows(Path(path), ANNOTATION_COLUMNS):
        try:
            ann = EventAnnotation(sid, int(start), int(end), etype)
        except ValueError as exc:
            raise MalformedRowError(str(exc), row=lineno) from None
        if dataset is not None:
            if sid not in dataset._by_id:
                raise MalformedRowError(f"unknown series {sid!r}", row=lineno)
            if ann.end >= len(dataset.get(sid)):
                raise MalformedRowError(f"interval [{ann.start}, {ann.end}] exceeds series {sid!r}", row=lineno)
        out.append(ann)
    return out


def write_annotations(annotations: Iterable[EventAnnotation], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ANNOTATION_COLUMNS)
        for a in annotations:
            writer.writerow((a.series_id, a.start, a.end, a.event_type))
