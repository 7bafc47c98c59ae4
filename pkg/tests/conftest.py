"""Session fixtures: shipped scenarios parsed once, headless runs cached.

The acceptance and harness tests all inspect the same six runs (baseline
and scripted for each shipped scenario); running them once per session
keeps the suite fast and guarantees every test sees identical data.
"""

from __future__ import annotations

import time
from pathlib import Path

import pytest

from foresim.harness import load_scenario_file, load_script, run

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"

SCENARIO_NAMES = ("scenario1", "scenario2", "scenario3")


class RunBundle:
    """One finished headless run plus everything tests need to inspect."""

    def __init__(self, name: str, config, script):
        self.name = name
        self.config = config
        self.script = script
        self.replans: list[tuple[int, list, object]] = []
        started = time.perf_counter()
        self.metrics, self.loop = run(
            config, script,
            on_replan=lambda tick, preds, plan:
                self.replans.append((tick, preds, plan)))
        self.wall_seconds = time.perf_counter() - started


@pytest.fixture(scope="session")
def scenario_dir() -> Path:
    return SCENARIOS


@pytest.fixture(scope="session")
def runs() -> dict[str, RunBundle]:
    """Baseline and scripted run of every shipped scenario."""
    out: dict[str, RunBundle] = {}
    for name in SCENARIO_NAMES:
        config = load_scenario_file(SCENARIOS / f"{name}.cfg")
        script = load_script((SCENARIOS / f"{name}.script").read_text(),
                             config)
        out[f"{name}/baseline"] = RunBundle(name, config, ())
        out[f"{name}/scripted"] = RunBundle(name, config, script)
    return out
