from .actor import ExperimentRunner, run_batch
from .messages import ExperimentDoneResponse, GetStatusMessage, GetStatusResponse, RunExperimentMessage

__all__ = [
    "ExperimentRunner",
    "run_batch",
    "ExperimentDoneResponse",
    "GetStatusMessage",
    "GetStatusResponse",
    "RunExperimentMessage",
]
