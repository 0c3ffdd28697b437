import os
import time
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from hrsglab.config import LabConfig

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("quick", deadline=None, max_examples=10)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ROOT = Path(__file__).resolve().parents[1]
DATASET_DIR = Path(os.environ.get("HRSGLAB_DATASET_DIR", ROOT / "runs" / "dataset"))


@pytest.fixture(scope="session")
def cfg():
    return LabConfig()


@pytest.fixture(scope="session")
def standard_dataset(cfg):
    """The default operating dataset, generated once and cached on disk."""
    from hrsglab.cli import cmd_dataset
    from hrsglab.lstm_tuner import read_dataset

    main, ft = DATASET_DIR / "dataset.csv", DATASET_DIR / "finetune.csv"
    if not (main.exists() and ft.exists()):
        DATASET_DIR.mkdir(parents=True, exist_ok=True)
        cmd_dataset(cfg, DATASET_DIR)
    return read_dataset(main), read_dataset(ft)


@pytest.fixture(scope="session")
def paper_traces(cfg):
    """PI and PINN runs of the ramp-and-leak scenario (no trained model needed)."""
    from hrsglab.cli import build_schedulers
    from hrsglab.scenario import build_paper_scenario, run_scenario

    spec = build_paper_scenario()
    return {name: run_scenario(spec, sched, cfg)
            for name, sched in build_schedulers(["pi", "pinn"], cfg, None).items()}


@pytest.fixture(scope="session")
def trained_lstm(cfg, standard_dataset):
    """(model, training report) from the cached dataset; about half a minute.

    The report carries the wall time of the fit as ``fit_seconds``.
    """
    from hrsglab.lstm_tuner import fit_lstm

    ds, ft = standard_dataset
    start = time.perf_counter()
    model, report = fit_lstm(ds, cfg, ft)
    report["fit_seconds"] = time.perf_counter() - start
    return model, report


ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one acceptance line; returns ``ok`` so the test can assert on it."""
    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
