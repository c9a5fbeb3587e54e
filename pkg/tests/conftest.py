import functools

import numpy as np
import pytest

from tss.config import benchmark_run_config, parse_run_config
from tss.core import Dataset
from tss.synthbench import GeneratorConfig, generate_synthetic

_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def record_criterion():
    def record(label: str, passed: bool, detail: str = "") -> None:
        _CRITERIA.append((label, bool(passed), detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _CRITERIA:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {label}" + (f": {detail}" if detail else ""))


@functools.lru_cache(maxsize=None)
def _benchmark(seed: int):
    return generate_synthetic(GeneratorConfig(seed=seed))


@pytest.fixture(scope="session")
def benchmark():
    """Default 1000 x 500 benchmark (seed 7) and its annotations."""
    return _benchmark(7)


def run_config(m=6, diversity="tw"):
    return parse_run_config(benchmark_run_config("unused.csv", m=m, diversity=diversity))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_dataset(rng, n_series=None, min_len=1, max_len=60) -> Dataset:
    n_series = n_series or int(rng.integers(1, 5))
    arrays = {}
    for i in range(n_series):
        n = int(rng.integers(min_len, max_len + 1))
        arrays[f"r{i:02d}"] = rng.normal(0.0, 1.0, n).cumsum()
    return Dataset.from_arrays(arrays)
