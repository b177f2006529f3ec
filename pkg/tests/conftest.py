"""Shared scenes and a per-session cache of suite results.

The three standard scenes mirror configs/rank{0,1,2}.toml. Suite results are
computed once per (rank, suite) and reused by the acceptance and CLI tests.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from gravikit.cli.config import load_config
from gravikit.cli.suites import Context, run_checks
from gravikit.geometry import Lattice, Scene
from gravikit.greens import HarmonicData

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = {rank: ROOT / "configs" / f"rank{rank}.toml" for rank in (0, 1, 2)}

SCENES = {
    0: Scene(Lattice(0), [[2.5, 0.4, 0.3]]),
    1: Scene(Lattice(1, [[0.0, 0.0, 12.0]]), [[2.5, 0.5, 3.0]]),
    2: Scene(Lattice(2, [[12.0, 0.0, 0.0], [0.5, 12.0, 0.0]]), [[3.0, 3.2, 1.5]]),
}

_DATA: dict[int, HarmonicData] = {}
_CONTEXTS: dict[int, Context] = {}
_RESULTS: dict[tuple[int, str], list] = {}
ACCEPTANCE_LINES: dict[int, str] = {}


def scene_data(rank: int) -> HarmonicData:
    if rank not in _DATA:
        _DATA[rank] = HarmonicData(SCENES[rank])
    return _DATA[rank]


def context(rank: int) -> Context:
    if rank not in _CONTEXTS:
        _CONTEXTS[rank] = Context(load_config(CONFIGS[rank]))
    return _CONTEXTS[rank]


def suite_checks(rank: int, suite: str) -> list:
    key = (rank, suite)
    if key not in _RESULTS:
        _RESULTS[key] = run_checks(context(rank), suite)
    return _RESULTS[key]


@pytest.fixture(scope="session", params=[0, 1, 2], ids=["rank0", "rank1", "rank2"])
def data(request):
    return scene_data(request.param)


@pytest.fixture(scope="session")
def data0():
    return scene_data(0)


@pytest.fixture(scope="session")
def data1():
    return scene_data(1)


@pytest.fixture(scope="session")
def data2():
    return scene_data(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
