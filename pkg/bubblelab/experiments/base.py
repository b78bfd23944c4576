import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import ClassVar, List, Optional

from bubblelab.core.errors import NumericalError
from bubblelab.core.report import Report
from bubblelab.experiments.config import ExperimentConfig


@dataclass
class ExperimentContext:
    """What an experiment gets to run with."""
    config: ExperimentConfig
    out_dir: Path
    logger: logging.Logger
    report: Optional[Report] = None

    @property
    def k(self) -> int:
        return self.config.k

    def new_report(self) -> Report:
        """A fresh report, kept as the one a failed run is written with."""
        self.report = Report(
            experiment_id=self.config.experiment_id,
            config_hash=self.config.content_hash(),
            seed=self.config.seed,
        )
        return self.report


@dataclass
class ExperimentResult:
    """The report of one run and the artifact files written next to it."""
    report: Report
    artifacts: List[Path] = field(default_factory=list)
    error: Optional[NumericalError] = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.report.passed


class Experiment(ABC):
    """A named pipeline that checks a group of claims and persists its artifacts."""
    experiment_id: ClassVar[str] = ""

    @abstractmethod
    def run(self, context: ExperimentContext) -> ExperimentResult:
        """Run to completion and return the filled report."""
        pass

    @abstractmethod
    def description(self) -> str:
        """One line for listings."""
        pass
