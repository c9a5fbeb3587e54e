"""JSON run and generator configuration: schema, validation, defaults."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .core import WindowSpec
from .selection import SelectionConfig
from .synthbench import EVENT_TYPES, GeneratorConfig
from .utility import KINDS, SIGMOID_FORMS, UtilityConfig, utility_from_dict, utility_to_dict

METHODS = ("insights", "random")

_num = {"type": "number"}
_nonneg = {"type": "number", "minimum": 0}
_pos = {"type": "number", "exclusiveMinimum": 0}
_count = {"type": "integer", "minimum": 0}

_PARAMS_BY_KIND = {
    "trend": {"W_h": _nonneg, "W_l": _nonneg},
    "range": {
        "tau_h": _num,
        "tau_l": _num,
        "k_h": _pos,
        "k_l": _pos,
        "weight_h": _nonneg,
        "weight_l": _nonneg,
        "sigmoid": {"enum": list(SIGMOID_FORMS)},
    },
    "trend_deviation": {},
}

UTILITY_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": list(KINDS)},
        "name": {"type": "string"},
        "feature_map": {"type": "string"},
        "parameters": {"type": "object"},
    },
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": kind}}},
            "then": {
                "properties": {
                    "parameters": {"type": "object", "properties": props, "additionalProperties": False}
                }
            },
        }
        for kind, props in _PARAMS_BY_KIND.items()
    ]
    + [
        {
            "if": {"properties": {"kind": {"const": "range"}}},
            "then": {"required": ["parameters"], "properties": {"parameters": {"required": ["tau_h", "tau_l"]}}},
        }
    ],
}

RUN_SCHEMA = {
    "type": "object",
    "required": ["dataset", "window", "utilities", "selection"],
    "additionalProperties": False,
    "properties": {
        "dataset": {"type": "string"},
        "output": {"type": "string"},
        "window": {
            "type": "object",
            "required": ["b", "l"],
            "additionalProperties": False,
            "properties": {"b": _count, "l": {"type": "integer", "minimum": 1}},
        },
        "utilities": {"type": "array", "minItems": 1, "items": UTILITY_SCHEMA},
        "selection": {
            "type": "object",
            "required": ["m"],
            "additionalProperties": False,
            "properties": {
                "method": {"enum": list(METHODS)},
                "m": {"type": "integer", "minimum": 1},
                "m_c": {"type": "integer", "minimum": 1},
                "m_p": _count,
                "diversity": {"enum": ["tw", "critic"]},
                "seed": {"type": "integer"},
                "overlap_gap": _count,
                "znormalize": {"type": "boolean"},
                "critic_mean": {"enum": ["bucket", "all"]},
            },
        },
    },
}

_range2 = {"type": "array", "items": _nonneg, "minItems": 2, "maxItems": 2}

GENERATOR_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "n_series": {"type": "integer", "minimum": 1},
        "length": {"type": "integer", "minimum": 2},
        "period": _pos,
        "amplitude": _num,
        "noise_sigma": _nonneg,
        "norm_high": _num,
        "norm_low": _num,
        "rates": {
            "type": "object",
            "additionalProperties": False,
            "properties": {t: {"type": "number", "minimum": 0, "maximum": 1} for t in EVENT_TYPES},
        },
        "evolving_duration": _range2,
        "evolving_magnitude": _range2,
        "surge_width": _range2,
        "surge_magnitude": _range2,
        "oob_duration": _range2,
        "oob_ramp": _count,
        "oob_margin": _range2,
        "min_separation": _count,
        "edge_margin": _count,
        "seed": {"type": "integer"},
    },
}


class ConfigError(ValueError):
    pass


def _field(path) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def validate(doc: dict, schema: dict) -> None:
    errors = sorted(jsonschema.Draft7Validator(schema).iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        e = jsonschema.exceptions.best_match(errors)
        raise ConfigError(f"{_field(e.absolute_path)}: {e.message}")


@dataclass(frozen=True)
class RunConfig:
    dataset: Path
    window: WindowSpec
    utilities: tuple[UtilityConfig, ...]
    selection: SelectionConfig
    method: str = "insights"
    output: Path | None = None

    def to_dict(self) -> dict:
        """Fully resolved form, echoed into every output artifact."""
        s = self.selection
        out = {
            "dataset": str(self.dataset),
            "window": {"b": self.window.b, "l": self.window.l},
            "utilities": [utility_to_dict(u) for u in self.utilities],
            "selection": {
                "method": self.method,
                "m": s.m,
                "m_c": s.m_c,
                "m_p": s.m_p,
                "diversity": s.diversity,
                "seed": s.seed,
                "overlap_gap": s.overlap_gap,
                "znormalize": s.znormalize,
                "critic_mean": s.critic_mean,
            },
        }
        if self.output is not None:
            out["output"] = str(self.output)
        return out


def parse_run_config(doc: dict, base_dir: Path | None = None) -> RunConfig:
    validate(doc, RUN_SCHEMA)
    base = base_dir or Path(".")

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    sel = dict(doc["selection"])
    method = sel.pop("method", "insights")
    try:
        window = WindowSpec(**doc["window"])
    except ValueError as exc:
        raise ConfigError(f"window: {exc}") from None
    utilities = []
    for i, u in enumerate(doc["utilities"]):
        try:
            utilities.append(utility_from_dict(u))
        except ValueError as exc:
            raise ConfigError(f"utilities[{i}]: {exc}") from None
    try:
        selection = SelectionConfig(**sel)
    except ValueError as exc:
        raise ConfigError(f"selection: {exc}") from None
    return RunConfig(
        dataset=resolve(doc["dataset"]),
        window=window,
        utilities=tuple(utilities),
        selection=selection,
        method=method,
        output=resolve(doc["output"]) if "output" in doc else None,
    )


def load_json(path: str | Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    return parse_run_config(load_json(path), base_dir=path.parent)


def parse_generator_config(doc: dict) -> GeneratorConfig:
    validate(doc, GENERATOR_SCHEMA)
    try:
        return GeneratorConfig.from_dict(doc)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def benchmark_run_config(dataset: str | Path, m: int = 6, diversity: str = "tw", gen: GeneratorConfig | None = None) -> dict:
    """Run config used for the event-capture benchmark.

    Range thresholds follow the generator's norm band; DTW runs on
    z-normalised windows so shape, not seasonal level, drives diversity.
    """
    gen = gen or GeneratorConfig()
    return {
        "dataset": str(dataset),
        "window": {"b": 2, "l": 10},
        "utilities": [
            {"kind": "trend", "parameters": {"W_h": 1.0, "W_l": 1.0}},
            {"kind": "range", "parameters": {"tau_h": gen.norm_high, "tau_l": gen.norm_low, "k_h": 5.0, "k_l": 5.0}},
            {"kind": "trend_deviation"},
        ],
        "selection": {"method": "insights", "m": m, "m_c": 10, "m_p": 0, "diversity": diversity, "znormalize": True},
    }
