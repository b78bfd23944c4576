from dataclasses import dataclass
from typing import Dict

import numpy as np

from bubblelab.core.fitting import PowerFit, fit_log_power, fit_power
from bubblelab.core.grid import RadialFn, RadialGrid, inner, norm_L2
from bubblelab.core.operators import apply_LU
from bubblelab.core.profiles.ground_state import ground_state, lambda_q_fn
from bubblelab.core.profiles.profile_set import (
    FIELDS,
    Profile,
    build_profile_set,
    source_A,
    source_B,
    source_Btilde,
)
from bubblelab.core.report import Convention, Provenance, Report
from bubblelab.experiments.base import Experiment, ExperimentContext, ExperimentResult

SOURCES = {"A": source_A, "B": source_B, "Btilde": source_Btilde}


def profile_residual(profile: Profile, k: int, r_lo: float = 1e-5, r_hi: float = 1e5) -> float:
    """||L X - F||_L2 on the canonical grid, restricted to [r_lo, r_hi]."""
    X = profile.solution
    grid = X.grid
    F = SOURCES[profile.name](grid, k)
    res = apply_LU(ground_state(k, grid.r), X, k).values - F.values
    inside = (grid.r >= r_lo) & (grid.r <= r_hi)
    return float(np.sqrt(grid.integrate(inside * res**2)))


def kernel_residual(grid: RadialGrid, k: int) -> float:
    """||L Lambda Q|| / ||Lambda Q||."""
    g = lambda_q_fn(grid, k)
    return norm_L2(apply_LU(ground_state(k, grid.r), g, k)) / norm_L2(g)


def end_fits(profile: Profile, k: int, decades: float = 2.0) -> Dict[str, PowerFit]:
    """Exponent fits over the first and last `decades` above/below the canonical grid ends."""
    r = profile.grid.r
    values = profile.solution.values
    lo = (r >= 10.0 * r[0]) & (r <= 10.0 ** decades * 10.0 * r[0])
    hi = (r <= r[-1] / 10.0) & (r >= r[-1] / 10.0 ** (decades + 1))
    if profile.log0:
        zero = fit_log_power(r[lo], values[lo], guess=float(k), window=1.0)
    else:
        zero = fit_power(r[lo], values[lo])
    return {"zero": zero, "infinity": fit_power(r[hi], values[hi])}


def relative_overlap(f: RadialFn, k: int) -> float:
    g = lambda_q_fn(f.grid, k)
    return abs(inner(f, g)) / (norm_L2(f) * norm_L2(g))


@dataclass
class ProfilesExperiment(Experiment):
    experiment_id = "profiles"

    residual_tol: float = 1e-5
    orth_tol: float = 1e-8
    exponent_tol: float = 0.05

    def description(self) -> str:
        return "Correction profiles A, B, Btilde: residual, orthogonality, asymptotics and solvability"

    def check_profile(self, report: Report, profile: Profile, k: int) -> None:
        name = profile.name
        report.check_below(
            f"residual ||L {name} - F_{name}||", profile_residual(profile, k), self.residual_tol,
            provenance=Provenance.LITERATURE, anchor="correction profiles", convention=Convention.RDR,
        )
        report.check_below(
            f"<{name}|Lambda Q> relative", relative_overlap(profile.solution, k), self.orth_tol,
            provenance=Provenance.LITERATURE, anchor="correction profiles", convention=Convention.RDR,
        )
        fits = end_fits(profile, k)
        for end, expected in (("zero", float(k)), ("infinity", float(2 - k))):
            report.check_close(
                f"{name} exponent at {end}", fits[end].exponent, expected, self.exponent_tol / abs(expected),
                provenance=Provenance.LITERATURE, anchor="profile asymptotics",
                log_corrected=bool(end == "zero" and profile.log0),
            )
        for field_name in FIELDS:
            values = profile.tables[field_name]
            norm = float(np.sqrt(profile.grid.integrate(values**2, 2 * profile.exp0, profile.log0,
                                                        2 * profile.exp_inf)))
            report.check_below(
                f"||{field_name}[{name}]||_L2 finite", norm, np.inf, provenance=Provenance.LITERATURE,
                anchor="profile asymptotics", convention=Convention.RDR,
            )

    def run(self, context: ExperimentContext) -> ExperimentResult:
        k = context.k
        report = context.new_report()
        profiles = build_profile_set(k)
        grid = profiles.A.grid

        report.check_below(
            "kernel ||L Lambda Q|| / ||Lambda Q||", kernel_residual(grid, k), 1e-6,
            provenance=Provenance.TRIVIAL, anchor="kernel of the linearized operator",
        )
        for label, source in (("B", source_B), ("Btilde", source_Btilde)):
            report.check_below(
                f"solvability <F_{label}|Lambda Q> relative", relative_overlap(source(grid, k), k), 1e-8,
                provenance=Provenance.LITERATURE, anchor="solvability integral", convention=Convention.RDR,
            )
        for profile in (profiles.A, profiles.B, profiles.Btilde):
            self.check_profile(report, profile, k)

        path = profiles.export_csv(context.out_dir / "profiles.csv", RadialGrid(1e-4, 1e4, 2001))
        return ExperimentResult(report, [path])
