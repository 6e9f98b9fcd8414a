"""Shared fixtures: long real-fault runs are simulated once per session.

Full traces of the real-fault tracking runs are ~300 MB each, so only the
summaries the tests need are kept.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import pytest

from quakectl.controllers import preset_spec
from quakectl.metrics import DEFAULT_TSS_FRACTION, compute_metrics
from quakectl.model import REAL_FAULT
from quakectl.sim import earthquake_scenario, run_scenario, tracking_scenario

ACCEPTANCE_LINES: list[str] = []


@dataclass(frozen=True)
class RunSummary:
    metrics: object
    peak_x2: float
    blew_up: bool
    samples: int
    final_e1: float


@lru_cache(maxsize=None)
def real_tracking(preset: str, ts_factor: int = 1) -> RunSummary:
    scenario = tracking_scenario(REAL_FAULT, preset_spec(preset),
                                 T_s=REAL_FAULT.T_s * ts_factor, name=preset)
    trace = run_scenario(scenario)
    m = compute_metrics(trace, DEFAULT_TSS_FRACTION * float(trace.t[-1]))
    return RunSummary(m, float(np.max(np.abs(trace.x2))), trace.blew_up,
                      len(trace), float(trace.e1[-1]))


@lru_cache(maxsize=None)
def real_earthquake(pressure: float = 0.0):
    return run_scenario(earthquake_scenario(REAL_FAULT, pressure=pressure))


@pytest.fixture(scope="session")
def tracking():
    return real_tracking


@pytest.fixture(scope="session")
def earthquake():
    return real_earthquake


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
