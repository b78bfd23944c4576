from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from bubblelab.core.functionals import (
    CutoffP,
    VirialOp,
    boundedness,
    build_cutoff,
    comparability,
    gaussian_battery,
    l0_a0_discrepancy,
    pohozaev_check,
    replacement_errors,
)
from bubblelab.core.functionals.virial import C0
from bubblelab.core.grid import RadialFn, RadialGrid, inner, lambda_values, norm_H, norm_L2
from bubblelab.core.modulation.models import ModState
from bubblelab.core.report import Convention, Provenance, Report, write_columns
from bubblelab.experiments.base import Experiment, ExperimentContext, ExperimentResult

SEAM_TOL = 1e-9


def seam_mismatch(cutoff: CutoffP) -> Dict[str, float]:
    """Largest one-sided disagreement of r^(j-2) p^(j), j <= 5, at the two seams."""
    jumps = cutoff.seam_jumps()
    out = {}
    for seam in ("R", "R0"):
        left, right = jumps[f"{seam}.left"], jumps[f"{seam}.right"]
        out[seam] = float(np.max(np.abs(left - right) / np.maximum(1.0, np.abs(left))))
    return out


def antisymmetry(op: VirialOp, hs: List[RadialFn]) -> float:
    """max lam |<A0 h | h>| / ||h||_L2^2."""
    return max(op.lam * abs(inner(op.apply_A0(h), h)) / norm_L2(h) ** 2 for h in hs)


def interior_agreement(op: VirialOp, grid: RadialGrid) -> float:
    """||A0 w - lam^-1 Lambda0 w|| / ||lam^-1 Lambda0 w|| for a bump well inside r <= R lam."""
    x0 = np.log(op.lam * op.cutoff.R) - 4.0
    w = RadialFn(grid, np.exp(-0.5 * ((grid.x - x0) / 0.5) ** 2))
    target = (w.values + lambda_values(w)) / op.lam
    diff = op.apply_A0(w).values - target
    return float(np.sqrt(grid.integrate(diff**2) / grid.integrate(target**2)))


@dataclass
class VirialExperiment(Experiment):
    experiment_id = "virial"

    presets: Tuple[Tuple[float, float], ...] = ((0.01, 10.0), (0.005, 50.0))
    lams: Tuple[float, ...] = (1e-2, 1e-1, 1.0)
    n_battery: int = 30
    discrepancy_tol: float = 0.05
    comparability_c: float = 10.0

    def description(self) -> str:
        return "Virial cutoff properties, truncated virial operators, Pohozaev bounds and energy-virial comparability"

    def check_cutoff(self, report: Report, cutoff: CutoffP) -> None:
        tag = f"c={cutoff.c:g} R={cutoff.R:g}"
        for prop in cutoff.properties():
            report.check_below(
                f"{prop.name} [{tag}]", prop.worst, prop.bound,
                provenance=Provenance.LITERATURE, anchor="virial cutoff", K=cutoff.K,
            )
        for seam, value in seam_mismatch(cutoff).items():
            report.check_below(
                f"seam {seam} one-sided derivatives [{tag}]", value, SEAM_TOL,
                provenance=Provenance.LITERATURE, anchor="virial cutoff",
            )

    def check_operators(self, report: Report, cutoff: CutoffP, grid: RadialGrid, k: int, seed: int) -> Dict[str, float]:
        tag = f"R={cutoff.R:g}"
        spreads: Dict[str, List[float]] = {"A": [], "A0": [], "lam_dlam_A0": []}
        worst = {"antisymmetry": 0.0, "interior": 0.0, "potential": 0.0, "square": 0.0}
        for lam in self.lams:
            op = VirialOp(lam, cutoff, grid)
            battery = gaussian_battery(grid, lam, self.n_battery, seed)
            worst["antisymmetry"] = max(worst["antisymmetry"], antisymmetry(op, battery))
            worst["interior"] = max(worst["interior"], interior_agreement(op, grid))
            for w in battery:
                for name, value in replacement_errors(op, w, k).items():
                    worst[name] = max(worst[name], value)
            for name, value in boundedness(op, battery, k).items():
                spreads[name].append(value)

        report.check_below(
            f"<A0 h|h> antisymmetry [{tag}]", worst["antisymmetry"], 1e-10,
            provenance=Provenance.LITERATURE, anchor="virial operator", convention=Convention.RDR,
        )
        report.check_below(
            f"A0 w = Lambda0 w / lam inside R lam [{tag}]", worst["interior"], 1e-5,
            provenance=Provenance.TRIVIAL, anchor="virial operator",
        )
        for name in ("potential", "square"):
            report.check_below(
                f"replacement error ({name}) [{tag}]", worst[name], C0,
                provenance=Provenance.LITERATURE, anchor="virial replacement", convention=Convention.RDR,
            )
        for name, values in spreads.items():
            values = np.array(values)
            report.check_below(
                f"||{name} w|| / ||w||_H uniform in lam [{tag}]", float(np.ptp(values) / np.max(values)), 0.1,
                provenance=Provenance.LITERATURE, anchor="virial operator bounds",
                values=values.tolist(), lams=list(self.lams),
            )
        return worst

    def check_comparability(self, report: Report, cutoff: CutoffP, grid: RadialGrid, k: int, seed: int) -> None:
        state = ModState(mu=1.0, lam=0.05, a=0.0, b=0.005)
        data = comparability(state, grid, k, cutoff, seed=seed)
        c = self.comparability_c
        for name in ("H1", "E1"):
            ratio = data[name]
            report.check_below(
                f"||w||^2 / {name} within [1/C, C]", float(np.max(np.maximum(ratio, 1.0 / ratio))), c,
                provenance=Provenance.LITERATURE, anchor="energy-virial comparability", convention=Convention.RDR,
                low=float(np.min(ratio)), high=float(np.max(ratio)),
            )
        report.check_below(
            "|V1| / ||w||^2", float(np.max(data["V1"])), c,
            provenance=Provenance.LITERATURE, anchor="energy-virial comparability", convention=Convention.RDR,
        )
        report.check_above(
            "(E3 - ||w||^2_(Lambda^-1 H) / 2) / ||w||_H^2", float(np.min(data["E3"])), -c,
            provenance=Provenance.LITERATURE, anchor="third energy lower bound",
        )

    def run(self, context: ExperimentContext) -> ExperimentResult:
        k = context.k
        seed = context.config.seed
        report = context.new_report()
        grid = context.config.grid.build()

        rows: Dict[str, List[float]] = {n: [] for n in ("c", "R", "K", "discrepancy", "potential", "square")}
        cutoffs = [build_cutoff(c, R) for c, R in self.presets]
        for cutoff in cutoffs:
            self.check_cutoff(report, cutoff)
            worst = self.check_operators(report, cutoff, grid, k, seed)
            pohozaev_check(self.lams, cutoff, grid, k, self.n_battery, seed, report=report)
            rows["c"].append(cutoff.c)
            rows["R"].append(cutoff.R)
            rows["K"].append(cutoff.K)
            rows["discrepancy"].append(l0_a0_discrepancy(cutoff, grid, k))
            rows["potential"].append(worst["potential"])
            rows["square"].append(worst["square"])

        order = np.argsort(rows["R"])
        disc = np.array(rows["discrepancy"])[order]
        report.check_below(
            f"||Lambda0 Lambda Q - A0 Lambda Q|| at R={max(rows['R']):g}", float(disc[-1]), self.discrepancy_tol,
            provenance=Provenance.LITERATURE, anchor="virial discrepancy", convention=Convention.RDR,
        )
        report.check_below(
            "discrepancy decreasing in R", float(np.max(np.diff(disc))) if len(disc) > 1 else 0.0, 0.0,
            provenance=Provenance.LITERATURE, anchor="virial discrepancy", values=disc.tolist(),
        )
        for name in ("potential", "square"):
            values = np.array(rows[name])[order]
            report.check_below(
                f"replacement error ({name}) decreasing in R", float(np.max(np.diff(values))) if len(values) > 1
                else 0.0, 0.0, provenance=Provenance.LITERATURE, anchor="virial replacement", gated=False,
                values=values.tolist(),
            )
        self.check_comparability(report, cutoffs[-1], grid, k, seed)

        path = write_columns(context.out_dir / "virial.csv", rows)
        return ExperimentResult(report, [path])
