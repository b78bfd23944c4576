from dataclasses import dataclass, field
from typing import Dict, List, Optional

from bubblelab.experiments.config import ExperimentConfig


# Request Messages (Incoming to Runner)


@dataclass
class RunExperimentMessage:
    """Request to run one experiment in a worker process."""
    config: ExperimentConfig


@dataclass
class GetStatusMessage:
    """Request the runner's current bookkeeping."""
    pass


# Response Messages (Outgoing from Runner)


@dataclass
class ExperimentDoneResponse:
    """Outcome of one experiment."""
    experiment_id: str
    passed: bool
    runtime: float
    failed_claims: List[str] = field(default_factory=list)
    error_code: Optional[int] = None
    error: Optional[str] = None


@dataclass
class GetStatusResponse:
    running: List[str]
    finished: Dict[str, bool]
