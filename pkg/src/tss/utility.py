"""Per-anchor importance scores and the buckets built from them.

Three built-in utilities are provided:

* ``trend``: weighted square of the least-squares slope over the window.
* ``range``: clipped sigmoids around an upper and a lower norm threshold,
  evaluated at the anchor value.
* ``trend_deviation``: squared gap between the naive slope over the ``b``
  points leading to the anchor and the least-squares window slope.

Utilities may run on a feature-mapped window instead of raw values. A
feature map takes a ``(k, l + 1)`` array of windows and returns an array of
the same shape; only ``identity`` ships, others are added with
:func:`register_feature_map`.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import AnchorIndex, Dataset, Series, Window, WindowSpec, enumerate_windows

KINDS = ("trend", "range", "trend_deviation")
SIGMOID_FORMS = ("centered", "logistic")
CHUNK_SIZE = 1 << 16

FeatureMap = Callable[[np.ndarray], np.ndarray]

FEATURE_MAPS: dict[str, FeatureMap] = {"identity": lambda windows: windows}


class InsufficientHistoryError(ValueError):
    pass


def register_feature_map(name: str, fn: FeatureMap) -> None:
    """Register a shape-preserving window transform under ``name``."""
    if name in FEATURE_MAPS:
        raise ValueError(f"feature map {name!r} already registered")
    FEATURE_MAPS[name] = fn


def get_feature_map(name: str) -> FeatureMap:
    try:
        return FEATURE_MAPS[name]
    except KeyError:
        raise ValueError(f"unknown feature map {name!r}; registered: {sorted(FEATURE_MAPS)}") from None


def apply_feature_map(name: str, windows: np.ndarray) -> np.ndarray:
    arr = np.asarray(windows, dtype=np.float64)
    single = arr.ndim == 1
    out = np.asarray(get_feature_map(name)(arr[None, :] if single else arr), dtype=np.float64)
    expected = (1, arr.size) if single else arr.shape
    if out.shape != expected:
        raise ValueError(f"feature map {name!r} changed window shape {expected} -> {out.shape}")
    return out[0] if single else out


@dataclass(frozen=True)
class UtilityConfig:
    """One utility function and its parameters.

    ``W_h``/``W_l`` weight rising/falling trends. ``tau_h``/``tau_l`` are the
    norm thresholds and ``k_h``/``k_l`` the sigmoid steepness for ``range``;
    ``weight_h``/``weight_l`` optionally weight its two terms.
    """

    kind: str
    W_h: float = 1.0
    W_l: float = 1.0
    tau_h: float | None = None
    tau_l: float | None = None
    k_h: float = 1.0
    k_l: float = 1.0
    weight_h: float = 1.0
    weight_l: float = 1.0
    sigmoid: str = "centered"
    feature_map: str = "identity"
    name: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.W_h < 0 or self.W_l < 0:
            raise ValueError("W_h and W_l must be non-negative")
        if self.weight_h < 0 or self.weight_l < 0:
            raise ValueError("weight_h and weight_l must be non-negative")
        if self.kind == "range":
            if self.tau_h is None or self.tau_l is None:
                raise ValueError("range utility needs tau_h and tau_l")
            if not self.tau_l < self.tau_h:
                raise ValueError(f"tau_l ({self.tau_l}) must be below tau_h ({self.tau_h})")
            if self.k_h <= 0 or self.k_l <= 0:
                raise ValueError("k_h and k_l must be positive")
        if self.sigmoid not in SIGMOID_FORMS:
            raise ValueError(f"sigmoid must be one of {SIGMOID_FORMS}, got {self.sigmoid!r}")
        get_feature_map(self.feature_map)

    @property
    def label(self) -> str:
        return self.name or self.kind


# -- scalar reference implementations ---------------------------------------


def slope(values) -> float:
    """Least-squares slope of ``values`` against 0..len-1."""
    y = np.asarray(values, dtype=np.float64)
    if y.ndim != 1 or y.size < 2:
        raise ValueError("slope needs at least 2 points")
    x = np.arange(y.size, dtype=np.float64)
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


def naive_slope(series: Series | Sequence[float], t: int, b: int) -> float:
    """``(y_t - y_{t-b}) / b``."""
    values = series.values if isinstance(series, Series) else np.asarray(series, dtype=np.float64)
    if b < 1:
        raise ValueError(f"b must be >= 1, got {b}")
    if t - b < 0 or t >= len(values):
        raise IndexError(f"t={t} with b={b} is out of range for a series of length {len(values)}")
    return float((values[t] - values[t - b]) / b)


def _sigmoid(z, form: str):
    if form == "centered":
        # 2 * (logistic(z) - 1/2) == tanh(z / 2), without overflow
        return np.tanh(np.multiply(z, 0.5))
    return 0.5 * (1.0 + np.tanh(np.multiply(z, 0.5)))


def _trend_from_slope(y_slope, cfg: UtilityConfig):
    up = np.maximum(y_slope, 0.0)
    down = np.maximum(np.negative(y_slope), 0.0)
    return cfg.W_h * up * up + cfg.W_l * down * down


def trend_utility(window: Window | Sequence[float], cfg: UtilityConfig) -> float:
    values = window.values if isinstance(window, Window) else window
    return float(_trend_from_slope(slope(apply_feature_map(cfg.feature_map, values)), cfg))


def range_utility(y_t: float, cfg: UtilityConfig) -> float:
    high = _sigmoid(cfg.k_h * (y_t - cfg.tau_h), cfg.sigmoid)
    low = _sigmoid(cfg.k_l * (cfg.tau_l - y_t), cfg.sigmoid)
    return float(cfg.weight_h * max(high, 0.0) + cfg.weight_l * max(low, 0.0))


def trend_deviation_utility(window: Window, series: Series, cfg: UtilityConfig) -> float:
    b = window.anchor - window.start
    if b < 1 or window.start < 0:
        raise InsufficientHistoryError(f"anchor {window.anchor} has {max(b, 0)} history points, needs >= 1")
    if cfg.feature_map == "identity":
        expected = naive_slope(series, window.anchor, b)
        fitted = slope(window.values)
    else:
        mapped = apply_feature_map(cfg.feature_map, window.values)
        expected = float((mapped[b] - mapped[0]) / b)
        fitted = slope(mapped)
    return (expected - fitted) ** 2


# -- vectorised scoring -----------------------------------------------------


def _slope_weights(length: int) -> np.ndarray:
    x = np.arange(length, dtype=np.float64) - (length - 1) / 2.0
    return x / np.dot(x, x)


def score_windows(cfg: UtilityConfig, windows: np.ndarray, b: int) -> np.ndarray:
    """Scores for a ``(k, l + 1)`` block of windows anchored at column ``b``."""
    mapped = apply_feature_map(cfg.feature_map, windows)
    if cfg.kind == "trend":
        return _trend_from_slope(mapped @ _slope_weights(mapped.shape[1]), cfg)
    if cfg.kind == "range":
        y = mapped[:, b]
        high = np.maximum(_sigmoid(cfg.k_h * (y - cfg.tau_h), cfg.sigmoid), 0.0)
        low = np.maximum(_sigmoid(cfg.k_l * (cfg.tau_l - y), cfg.sigmoid), 0.0)
        return cfg.weight_h * high + cfg.weight_l * low
    if b < 1:
        raise InsufficientHistoryError("trend_deviation needs b >= 1")
    expected = (mapped[:, b] - mapped[:, 0]) / b
    diff = expected - mapped @ _slope_weights(mapped.shape[1])
    return diff * diff


def score_anchors(
    cfg: UtilityConfig, anchors: AnchorIndex, threads: int = 1, chunk_size: int = CHUNK_SIZE
) -> np.ndarray:
    """Score every anchor; chunks may run on a thread pool, merged in anchor order."""
    bounds = [(lo, min(lo + chunk_size, len(anchors))) for lo in range(0, len(anchors), chunk_size)]
    b = anchors.spec.b

    def run(bound):
        lo, hi = bound
        return score_windows(cfg, anchors.window_matrix(slice(lo, hi)), b)

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, bounds))
    else:
        parts = [run(bd) for bd in bounds]
    return np.concatenate(parts) if parts else np.zeros(0)


# -- buckets ----------------------------------------------------------------


def rl_score(scores: np.ndarray) -> float:
    """Max score over population std; 0 for a constant score vector."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0 or np.ptp(scores) == 0:
        return 0.0
    sd = scores.std()
    # a spread below float resolution counts as degenerate too
    return float(scores.max() / sd) if sd > 0 else 0.0


def descending_order(scores: np.ndarray) -> np.ndarray:
    # stable on the negated scores: equal scores keep anchor order
    return np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")


@dataclass
class UtilityBucket:
    function_id: str
    scores: np.ndarray
    queue: np.ndarray = field(default=None)
    rl: float = field(default=None)

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if self.queue is None:
            self.queue = descending_order(self.scores)
        if self.rl is None:
            self.rl = rl_score(self.scores)

    @property
    def median(self) -> float:
        return float(np.median(self.scores))


def function_ids(fns: Sequence[UtilityConfig]) -> list[str]:
    """Labels for each function, suffixed where a label repeats."""
    labels = [f.label for f in fns]
    out = []
    for i, label in enumerate(labels):
        out.append(label if labels.count(label) == 1 else f"{label}#{labels[: i + 1].count(label)}")
    return out


def build_buckets(
    d: Dataset | AnchorIndex, w: WindowSpec | None, fns: Sequence[UtilityConfig], threads: int = 1
) -> list[UtilityBucket]:
    if not fns:
        raise ValueError("at least one utility function is required")
    anchors = d if isinstance(d, AnchorIndex) else enumerate_windows(d, w)
    buckets = []
    for fid, cfg in zip(function_ids(fns), fns):
        scores = score_anchors(cfg, anchors, threads=threads)
        if not np.all(np.isfinite(scores)):
            raise ValueError(f"utility {fid!r} produced non-finite scores")
        buckets.append(UtilityBucket(fid, scores))
    return buckets


def bucket_order(buckets: Sequence[UtilityBucket]) -> list[int]:
    """Bucket indices by descending rl; equal rl keeps configuration order."""
    if not buckets:
        raise ValueError("no buckets")
    return sorted(range(len(buckets)), key=lambda i: -buckets[i].rl)


def utility_from_dict(raw: dict) -> UtilityConfig:
    """Build a config from the run-file form ``{kind, parameters, feature_map}``."""
    params = dict(raw.get("parameters", {}))
    return UtilityConfig(
        kind=raw["kind"],
        feature_map=raw.get("feature_map", "identity"),
        name=raw.get("name"),
        **params,
    )


def utility_to_dict(cfg: UtilityConfig) -> dict:
    params = {}
    if cfg.kind == "trend":
        params = {"W_h": cfg.W_h, "W_l": cfg.W_l}
    elif cfg.kind == "range":
        params = {
            "tau_h": cfg.tau_h,
            "tau_l": cfg.tau_l,
            "k_h": cfg.k_h,
            "k_l": cfg.k_l,
            "weight_h": cfg.weight_h,
            "weight_l": cfg.weight_l,
            "sigmoid": cfg.sigmoid,
        }
    out = {"kind": cfg.kind, "parameters": params, "feature_map": cfg.feature_map}
    if cfg.name is not None:
        out["name"] = cfg.name
    return out
