import asyncio
import logging
from concurrent.futures import ProcessPoolExecutor
from functools import singledispatchmethod
from typing import Any, Dict, List, Optional

from bubblelab.core.actor import Actor
from bubblelab.core.errors import NumericalError
from bubblelab.experiments.config import ExperimentConfig
from bubblelab.experiments.registry import run_experiment
from bubblelab.runner.messages import (
    ExperimentDoneResponse,
    GetStatusMessage,
    GetStatusResponse,
    RunExperimentMessage,
)


class ExperimentRunner(Actor):
    """
    Runs experiments in a process pool.

    Each RunExperimentMessage is handed to the pool without blocking the
    inbox, so several asks in flight run in parallel up to max_workers.
    """

    def __init__(self, max_workers: Optional[int] = None, inbox_size: int = 50):
        super().__init__(name="runner", inbox_size=inbox_size)
        self.max_workers = max_workers
        self.pool: Optional[ProcessPoolExecutor] = None
        self.running_ids: List[str] = []
        self.finished: Dict[str, bool] = {}
        self.logger = logging.getLogger("bubblelab.runner")

    async def on_start(self):
        self.pool = ProcessPoolExecutor(max_workers=self.max_workers)
        self.logger.info(f"Runner started ({self.max_workers or 'default'} workers)")

    async def on_stop(self):
        if self.pool:
            self.pool.shutdown(wait=True, cancel_futures=True)
            self.pool = None
        self.logger.info("Runner stopped")

    @singledispatchmethod
    async def on_receive(self, message) -> Any:
        self.logger.warning(f"Unknown message type: {type(message)}")
        return None

    @on_receive.register
    async def _(self, msg: RunExperimentMessage) -> asyncio.Future:
        """Schedule the run; the reply is a future resolving to ExperimentDoneResponse."""
        return asyncio.ensure_future(self._run(msg))

    @on_receive.register
    async def _(self, msg: GetStatusMessage) -> GetStatusResponse:
        return GetStatusResponse(running=list(self.running_ids), finished=dict(self.finished))

    async def _run(self, msg: RunExperimentMessage) -> ExperimentDoneResponse:
        experiment_id = msg.config.experiment_id
        self.running_ids.append(experiment_id)
        loop = asyncio.get_running_loop()
        try:
            result = await loop.run_in_executor(self.pool, run_experiment, experiment_id, msg.config)
        except NumericalError as e:
            self.logger.error(f"{experiment_id} aborted: {e}")
            self.finished[experiment_id] = False
            return ExperimentDoneResponse(experiment_id, False, 0.0, error_code=e.code, error=e.message)
        finally:
            self.running_ids.remove(experiment_id)

        report = result.report
        self.finished[experiment_id] = result.passed
        return ExperimentDoneResponse(
            experiment_id=experiment_id,
            passed=result.passed,
            runtime=report.runtime,
            failed_claims=[c.name for c in report.failed_claims()],
            error_code=result.error.code if result.error else None,
            error=result.error.message if result.error else None,
        )


async def run_batch(configs: List[ExperimentConfig], max_workers: Optional[int] = None) -> List[ExperimentDoneResponse]:
    """Run every config through one runner and collect the responses in order."""
    runner = ExperimentRunner(max_workers=max_workers)
    await runner.start()
    try:
        pending = [await runner.ask(RunExperimentMessage(config), timeout=None) for config in configs]
        return list(await asyncio.gather(*pending))
    finally:
        await runner.stop()
