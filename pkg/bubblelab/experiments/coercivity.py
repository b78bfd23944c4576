from dataclasses import dataclass
from typing import Tuple

from bubblelab.core.functionals.coercivity import OPERATOR_IDS, coercivity_suite
from bubblelab.experiments.base import Experiment, ExperimentContext, ExperimentResult


@dataclass
class CoercivityExperiment(Experiment):
    experiment_id = "coercivity"

    n: int = 600
    operator_ids: Tuple[str, ...] = OPERATOR_IDS

    def description(self) -> str:
        return "Constrained Rayleigh minima of L, L^2 and the localized operators about the ansatz"

    def run(self, context: ExperimentContext) -> ExperimentResult:
        report = coercivity_suite(context.k, self.operator_ids, self.n, context.new_report())
        return ExperimentResult(report, [])
