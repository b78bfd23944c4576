import asyncio

from bubblelab.experiments.config import ExperimentConfig
from bubblelab.runner import ExperimentRunner, GetStatusMessage, GetStatusResponse, run_batch


def test_status_of_idle_runner():
    async def scenario():
        runner = ExperimentRunner(max_workers=1)
        await runner.start()
        try:
            return await runner.ask(GetStatusMessage())
        finally:
            await runner.stop()

    status = asyncio.run(scenario())
    assert isinstance(status, GetStatusResponse)
    assert status.running == []
    assert status.finished == {}


def test_unknown_message_gets_none():
    async def scenario():
        runner = ExperimentRunner(max_workers=1)
        await runner.start()
        try:
            return await runner.ask("hello")
        finally:
            await runner.stop()

    assert asyncio.run(scenario()) is None


def test_run_batch(tmp_path):
    configs = [
        ExperimentConfig(experiment_id="constants", out_dir=tmp_path / "a", params={"ks": [4]}),
        ExperimentConfig(experiment_id="constants", out_dir=tmp_path / "b", params={"ks": [3]}),
    ]
    passed, failed = asyncio.run(run_batch(configs, max_workers=2))
    assert passed.passed and passed.error is None
    assert passed.failed_claims == []
    assert not failed.passed
    assert failed.error_code == 200
    assert (tmp_path / "a" / "constants" / "report.json").exists()
    assert (tmp_path / "b" / "constants" / "report.json").exists()


def test_module_loggers_follow_package_path():
    from bubblelab.core import actor
    from bubblelab.core.evolver import stepper
    from bubblelab.core.extractor import track

    for module in (actor, stepper, track):
        assert module.logger.name == module.__name__
        assert module.logger.name.startswith("bubblelab.")
