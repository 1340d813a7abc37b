"""
Tests for the subdiff-lab facade, worker pool and command line.
"""
import pytest
import pytest_asyncio
import asyncio
import json
from fractions import Fraction
from pathlib import Path
import tempfile
import threading
import time
import shutil

from subdiff_lab import cli
from subdiff_lab.system import SubdiffLab, create_lab
from subdiff_lab.core.base import CapacityError, ConfigError, Plan, Resources, RunTimeoutError, Task, TrialError
from subdiff_lab.core.config import ENV_SEED, ExperimentConfig
from subdiff_lab.core.coordinator import TrialCoordinator
from subdiff_lab.core.experiments import GapLipExperiment
from subdiff_lab.core.reports import GapReport, ReportWriter


@pytest_asyncio.fixture(scope="function")
async def lab():
    """Fixture to create a lab and a scratch directory for reports"""
    # Create temporary directory for report output
    temp_dir = tempfile.mkdtemp()

    try:
        yield await create_lab(log_level="DEBUG"), Path(temp_dir)
    finally:
        # Cleanup temporary directory after tests
        shutil.rmtree(temp_dir)


@pytest.mark.asyncio
async def test_gap_run(lab):
    """Test a small gap-lip run end to end"""
    system, _ = lab
    report = await system.run(ExperimentConfig("gap-lip", nu=3, trials=10, seed=7))

    # Verify report structure
    assert isinstance(report, GapReport)
    assert [row.trial for row in report.rows] == list(range(10))
    assert report.summary["trials"] == 10
    assert all(row.gap == Fraction(1, 2) for row in report.rows if row.found)
    assert report.config["nu"] == 3


@pytest.mark.asyncio
async def test_reports_are_reproducible(lab):
    """Same config gives the same rows whatever the worker count"""
    system, _ = lab
    config = ExperimentConfig("gap-cvx", nu=4, trials=8, seed=99)
    first = await system.run(config)
    second = await system.run(ExperimentConfig("gap-cvx", nu=4, trials=8, seed=99, workers=4))
    assert first.rows_checksum == second.rows_checksum

    # a different seed moves the witnesses
    other = await system.run(ExperimentConfig("gap-cvx", nu=4, trials=8, seed=100))
    assert other.rows_checksum != first.rows_checksum


@pytest.mark.asyncio
async def test_json_and_csv_output(lab):
    """Test both report formats on disk"""
    system, out_dir = lab
    json_path = out_dir / "ulln.json"
    csv_path = out_dir / "ulln.csv"
    base = dict(experiment="ulln-1d", nu_list=[8, 32], trials=3, seed=5)

    await system.run(ExperimentConfig(**base, out=str(json_path)))
    await system.run(ExperimentConfig(**base, out=str(csv_path), format="csv"))

    # Verify both files carry the same rows
    document = json.loads(json_path.read_text(encoding="utf-8"))
    meta = json.loads((out_dir / "ulln.csv.meta.json").read_text(encoding="utf-8"))
    rows = ReportWriter.read_csv_rows(csv_path.read_text(encoding="utf-8"))
    assert document["rows_checksum"] == meta["rows_checksum"]
    assert len(rows) == len(document["rows"]) == 6
    assert [entry["nu"] for entry in document["summary"]["per_nu"]] == [8, 32]
    assert "workers" not in document["config"]


@pytest.mark.asyncio
async def test_ulln_samples_are_nested_across_nu(lab):
    """Trial t draws from the same sub-seed at every nu"""
    system, _ = lab
    report = await system.run(ExperimentConfig("ulln-1d", nu_list=[16, 64], trials=2, seed=3))
    seeds = [(row.nu, row.seed) for row in report.rows]
    assert seeds[0][1] == seeds[2][1]
    assert seeds[1][1] == seeds[3][1]


@pytest.mark.asyncio
async def test_invalid_config(lab):
    """Test that every config issue surfaces at once"""
    system, _ = lab
    with pytest.raises(ConfigError) as excinfo:
        await system.run(ExperimentConfig("eps-ulln", nu_list=[10], epsilon=0, trials=0))
    assert {issue.field for issue in excinfo.value.issues} == {"epsilon", "trials"}
    assert system.validate(ExperimentConfig("shatter", n=2)) == []


@pytest.mark.asyncio
async def test_system_metrics(lab):
    """Test run monitoring"""
    system, _ = lab
    await system.run(ExperimentConfig("shatter", n=2))
    await system.run(ExperimentConfig("shatter", n=3))
    metrics = system.get_system_metrics()
    assert metrics["shatter"]["runs"] == 2
    assert metrics["shatter"]["avg_wall_time_s"] >= 0


@pytest.mark.asyncio
async def test_coordinator_preserves_task_order():
    """Results come back by task index even when later tasks finish first"""
    coordinator = TrialCoordinator(Resources(workers=4))
    plan = Plan(experiment="demo", tasks=[Task(id=f"demo-{i}", index=i, seed=i) for i in range(8)])

    def trial(task):
        time.sleep(0.01 * (8 - task.index))
        return task.index

    assert await coordinator.execute(plan, trial) == list(range(8))


@pytest.mark.asyncio
async def test_coordinator_wraps_unexpected_errors():
    coordinator = TrialCoordinator()
    plan = Plan(experiment="demo", tasks=[Task(id="demo-0", index=0, seed=0)])

    def trial(task):
        raise RuntimeError("boom")

    with pytest.raises(TrialError) as excinfo:
        await coordinator.execute(plan, trial)
    assert excinfo.value.task_id == "demo-0"
    assert isinstance(excinfo.value.cause, RuntimeError)


@pytest.mark.asyncio
async def test_coordinator_timeout():
    coordinator = TrialCoordinator(Resources(workers=1, timeout=0.05))
    plan = Plan(experiment="demo", tasks=[Task(id="demo-0", index=0, seed=0)])

    def trial(task):
        time.sleep(0.5)

    with pytest.raises(asyncio.TimeoutError):
        await coordinator.execute(plan, trial)


@pytest.mark.asyncio
async def test_coordinator_timeout_cancels_queued_trials(caplog):
    """Trials still waiting for a worker never start once the run times out"""
    coordinator = TrialCoordinator(Resources(workers=1, timeout=0.05))
    plan = Plan(experiment="demo", tasks=[Task(id=f"demo-{i}", index=i, seed=i) for i in range(3)])
    started = []
    release = threading.Event()

    def trial(task):
        started.append(task.id)
        release.wait(5)
        return task.index

    try:
        with pytest.raises(RunTimeoutError) as excinfo:
            await coordinator.execute(plan, trial)
    finally:
        release.set()
    assert isinstance(excinfo.value, CapacityError)
    assert excinfo.value.abandoned == ["demo-0", "demo-1", "demo-2"]
    assert "abandoned 3 trials: demo-0, demo-1, demo-2" in caplog.text

    await asyncio.sleep(0.05)
    assert started == ["demo-0"]


@pytest.mark.asyncio
async def test_coordinator_empty_plan():
    assert await TrialCoordinator(Resources(timeout=0.01)).execute(Plan(experiment="demo", tasks=[]), None) == []


def test_cli_prints_json(capsys):
    assert cli.main(["--experiment", "shatter", "--n", "3"]) == cli.EXIT_OK
    document = json.loads(capsys.readouterr().out)
    assert document["summary"]["all_patterns_realized"]
    assert len(document["rows"]) == 8


def test_cli_config_error(capsys):
    assert cli.main(["--experiment", "gap-lip"]) == cli.EXIT_CONFIG
    assert "nu: required for gap-lip" in capsys.readouterr().err


def test_cli_epsilon_message(capsys):
    code = cli.main(["--experiment", "eps-ulln", "--nu-list", "10", "--epsilon", "0"])
    assert code == cli.EXIT_CONFIG
    assert "ε must be positive; ε=0 is the counterexample regime" in capsys.readouterr().err


def test_cli_capacity_error(capsys):
    assert cli.main(["--experiment", "gap-lip", "--nu", "30"]) == cli.EXIT_CAPACITY
    assert "K_bound overflow" in capsys.readouterr().err


def test_cli_unwritable_output(tmp_path):
    out = tmp_path / "missing" / "report.json"
    assert cli.main(["--experiment", "shatter", "--n", "2", "--out", str(out)]) == cli.EXIT_IO


def test_cli_trial_failure(monkeypatch):
    def broken(self, task):
        raise RuntimeError("broken trial")

    monkeypatch.setattr(GapLipExperiment, "trial", broken)
    assert cli.main(["--experiment", "gap-lip", "--nu", "2"]) == cli.EXIT_TRIAL


@pytest.mark.asyncio
async def test_cli_run_timeout_is_capacity(monkeypatch, capsys):
    release = threading.Event()

    def slow(self, task):
        release.wait(5)

    monkeypatch.setattr(GapLipExperiment, "trial", slow)
    try:
        code = await cli.run(ExperimentConfig("gap-lip", nu=2, trials=2), SubdiffLab(timeout=0.01))
    finally:
        release.set()
    assert code == cli.EXIT_CAPACITY
    assert "unfinished" in capsys.readouterr().err


def test_cli_check_only(capsys):
    assert cli.main(["--experiment", "shatter", "--n", "3", "--check"]) == cli.EXIT_OK
    assert capsys.readouterr().out == ""
    assert cli.main(["--experiment", "shatter", "--n", "99", "--check"]) == cli.EXIT_CAPACITY


def test_cli_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv(ENV_SEED, "4242")
    cli.main(["--experiment", "gadget-stats", "--nu", "2", "--trials", "3"])
    from_env = json.loads(capsys.readouterr().out)
    assert from_env["config"]["seed"] == 4242

    # the flag wins over the environment
    cli.main(["--experiment", "gadget-stats", "--nu", "2", "--trials", "3", "--seed", "1"])
    assert json.loads(capsys.readouterr().out)["config"]["seed"] == 1


def test_cli_csv_to_file(tmp_path):
    out = tmp_path / "gadget.csv"
    code = cli.main([
        "--experiment", "gadget-stats", "--nu", "3", "--trials", "5", "--format", "csv", "--out", str(out)
    ])
    assert code == cli.EXIT_OK
    rows = ReportWriter.read_csv_rows(out.read_text(encoding="utf-8"))
    assert [int(row["trial"]) for row in rows] == list(range(5))
    assert (tmp_path / "gadget.csv.meta.json").exists()
