import time
from pathlib import Path

import pytest

from blowup_lab.config import ExperimentConfig
from blowup_lab.experiment import run_experiment

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def fixture_config(name: str, **overrides) -> ExperimentConfig:
    from blowup_lab.config import load_config

    cfg = load_config(CONFIG_DIR / name)
    for path, value in overrides.items():
        cfg = cfg.with_value(path.replace("__", "."), value)
    return cfg.validate()


class TimedRun:
    def __init__(self, cfg, out):
        start = time.perf_counter()
        self.result = run_experiment(cfg, out)
        self.elapsed = time.perf_counter() - start
        self.cfg = cfg
        self.out = out
        self.report = self.result.report
        self.trace = self.result.trace


@pytest.fixture(scope="session")
def f1_run(tmp_path_factory):
    return TimedRun(fixture_config("f1_boundary_dominated.yaml"), tmp_path_factory.mktemp("f1"))


@pytest.fixture(scope="session")
def f2_run(tmp_path_factory):
    return TimedRun(fixture_config("f2_no_reaction.yaml"), tmp_path_factory.mktemp("f2"))


@pytest.fixture(scope="session")
def f3_run(tmp_path_factory):
    return TimedRun(fixture_config("f3_boundary_only.yaml"), tmp_path_factory.mktemp("f3"))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key} {'PASS' if ok else 'FAIL'}  {detail}")
