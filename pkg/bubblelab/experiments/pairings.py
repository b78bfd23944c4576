from dataclasses import dataclass
from typing import Optional, Tuple

from bubblelab.core.profiles.pairings import ASYMPTOTIC_NU, DEFAULT_NUS, PAIRING_REGISTRY, pairing_sweep
from bubblelab.core.profiles.profile_set import build_profile_set
from bubblelab.experiments.base import Experiment, ExperimentContext, ExperimentResult
from bubblelab.experiments.plotdata import emit_plotdata


@dataclass
class PairingsExperiment(Experiment):
    experiment_id = "pairings"

    nus: Tuple[float, ...] = DEFAULT_NUS
    c_bound: float = 1e4
    slope_tol: float = 0.3
    window_nu: float = ASYMPTOTIC_NU
    pair_ids: Optional[Tuple[str, ...]] = None

    def description(self) -> str:
        return "Ratio sweeps of the bubble/profile pairing estimates against their nu powers"

    def run(self, context: ExperimentContext) -> ExperimentResult:
        k = context.k
        report = context.new_report()
        profiles = build_profile_set(k)
        grid = context.config.grid.build()
        artifacts = []
        for pair_id in self.pair_ids or tuple(PAIRING_REGISTRY):
            pairing_sweep(pair_id, self.nus, k, grid, self.c_bound, self.slope_tol, profiles, report, self.window_nu)
            stem = "pairing_" + "".join(ch if ch.isalnum() else "_" for ch in pair_id)
            artifacts += emit_plotdata(report.claims[-1], "pairing", context.out_dir / "pairings", k, stem)
        return ExperimentResult(report, artifacts)
