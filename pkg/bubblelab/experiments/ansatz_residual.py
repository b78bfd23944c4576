import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from bubblelab.core.ansatz import (
    SearchBox,
    alternate_gamma,
    assemble,
    distance_plus,
    export_csv,
    interaction_pairings,
    psi1_from,
    psi2_from,
    static_residual,
    static_residual_direct,
)
from bubblelab.core.fitting import fit_power, log_slope
from bubblelab.core.grid import RadialFn, RadialGrid, norm_H, norm_L2
from bubblelab.core.modulation.models import ModRates, ModState
from bubblelab.core.modulation.system import formal_branch, state_derivative
from bubblelab.core.profiles.ground_state import constants
from bubblelab.core.profiles.pairings import envelope
from bubblelab.core.profiles.profile_set import ProfileSet, build_profile_set
from bubblelab.core.report import Convention, Provenance, Report, write_columns
from bubblelab.experiments.base import Experiment, ExperimentContext, ExperimentResult


def perturbed_rates(rates: ModRates, epsilon: float) -> ModRates:
    """Every rate scaled by 1 + epsilon; each modulation bracket becomes epsilon times its leading term."""
    f = 1.0 + epsilon
    return ModRates(mu=rates.mu * f, lam=rates.lam * f, a=rates.a * f, b=rates.b * f)


def psi1_envelope(s: ModState, k: int, rates: ModRates, gamma: float) -> float:
    """|b + lam'|/lam + nu |a - mu'|/lam + |b| |b' + gamma nu^k/lam| + |a| |a' + gamma nu^(k+1)/lam|."""
    nu_k = s.nu**k
    return (
        abs(s.b + rates.lam) / s.lam
        + s.nu * abs(s.a - rates.mu) / s.lam
        + abs(s.b) * abs(rates.b + gamma * nu_k / s.lam)
        + abs(s.a) * abs(rates.a + gamma * nu_k * s.nu / s.lam)
    )


def psi2_envelope(s: ModState, k: int) -> float:
    """(nu^(2k-1) + b^2 nu^(k-1) + b^4 + a^4 nu) / lam."""
    nu = s.nu
    return (nu ** (2 * k - 1) + s.b**2 * nu ** (k - 1) + s.b**4 + s.a**4 * nu) / s.lam


def shifted(s: ModState, rates: ModRates, h: float) -> ModState:
    return s.model_copy(update={
        "t": s.t + h,
        "mu": s.mu + h * rates.mu,
        "lam": s.lam + h * rates.lam,
        "a": s.a + h * rates.a,
        "b": s.b + h * rates.b,
    })


def fd_psi1_gap(s: ModState, rates: ModRates, grid: RadialGrid, k: int, profiles: ProfileSet, h: float) -> float:
    """||psi1 - (Phi_dot - central difference of Phi along the rates)||_L2."""
    ansatz = assemble(s, grid, k, profiles)
    plus = assemble(shifted(s, rates, h), grid, k, profiles).phi.values
    minus = assemble(shifted(s, rates, -h), grid, k, profiles).phi.values
    fd = ansatz.phidot.values - (plus - minus) / (2.0 * h)
    psi = psi1_from(ansatz, rates)
    return norm_L2(psi.with_values(psi.values - fd))


@dataclass
class AnsatzResidualExperiment(Experiment):
    experiment_id = "ansatz-residual"

    t_min: float = 20.0
    n_points: int = 6
    epsilon: float = 0.1
    c_bound: float = 1e4
    slope_tol: float = 0.3
    fd_step: float = 1e-5
    energy_nu: float = 0.01
    energy_tol: float = 0.02
    dplus_points: int = 5
    dplus_tol: float = 0.1
    nus: Tuple[float, ...] = (0.1, 0.05, 0.02, 0.01)

    def description(self) -> str:
        return "Residuals Psi_1 and Psi_2 of the refined ansatz along the formal branch, its energy and d+ decay"

    def sweep_times(self, k: int) -> np.ndarray:
        """One decade of lam along the branch."""
        return np.logspace(math.log10(self.t_min), math.log10(self.t_min) + (k - 2) / 2.0, self.n_points)

    def check_residual_sweep(
        self, report: Report, k: int, grid: RadialGrid, profiles: ProfileSet,
    ) -> Dict[str, np.ndarray]:
        gamma = constants(k).gamma_k
        traj = formal_branch(self.sweep_times(k), k).trajectory
        cols: Dict[str, List[float]] = {n: [] for n in ("t", "lam", "psi2_L2", "psi2_env", "psi1_H", "psi1_env")}
        psi1_formal = 0.0
        for i in range(len(traj)):
            s = traj.state(i)
            rates = state_derivative(s, k)
            ansatz = assemble(s, grid, k, profiles)
            psi1_formal = max(psi1_formal, norm_H(psi1_from(ansatz, rates), k))
            off = perturbed_rates(rates, self.epsilon)
            cols["t"].append(s.t)
            cols["lam"].append(s.lam)
            cols["psi2_L2"].append(norm_L2(psi2_from(ansatz, rates)))
            cols["psi2_env"].append(psi2_envelope(s, k))
            cols["psi1_H"].append(norm_H(psi1_from(ansatz, off), k))
            cols["psi1_env"].append(psi1_envelope(s, k, off, gamma))
        out = {n: np.array(v) for n, v in cols.items()}

        report.check_below(
            "||Psi_1||_H with the formal rates", psi1_formal, 1e-10,
            provenance=Provenance.TRIVIAL, anchor="modulation brackets", convention=Convention.RDR,
        )
        for name, env in (("psi2_L2", "psi2_env"), ("psi1_H", "psi1_env")):
            ratio = out[name] / out[env]
            out[f"{name}_ratio"] = ratio
            # growth as lam -> 0 shows as a negative slope
            report.check_envelope(
                f"{name} / envelope along the branch", ratio.tolist(),
                log_slope(out["lam"], np.maximum(ratio, 1e-300)), self.c_bound, self.slope_tol,
                anchor="ansatz residual estimates", convention=Convention.RDR,
            )
        return out

    def check_static(self, report: Report, k: int, grid: RadialGrid, profiles: ProfileSet) -> None:
        lone = assemble(ModState(mu=1e12, lam=1.0), grid, k, profiles)
        report.check_below(
            "single bubble ||Delta Q - f(Q)/r^2||_L2", norm_L2(RadialFn(grid, static_residual_direct(lone))), 1e-8,
            provenance=Provenance.TRIVIAL, anchor="harmonic map equation", convention=Convention.RDR,
        )
        ansatz = assemble(ModState(mu=1.0, lam=0.1, a=0.005, b=0.01), grid, k, profiles)
        split = RadialFn(grid, static_residual(ansatz))
        direct = RadialFn(grid, static_residual_direct(ansatz))
        scale = norm_L2(RadialFn(grid, ansatz.laplacian_phi))
        report.check_below(
            "split vs direct static residual (relative)", norm_L2(split.with_values(split.values - direct.values)) / scale,
            1e-8, provenance=Provenance.DERIVED, anchor="nonlinear decomposition", convention=Convention.RDR,
        )

    def check_finite_difference(
        self, report: Report, s: ModState, k: int, grid: RadialGrid, profiles: ProfileSet,
    ) -> None:
        rates = perturbed_rates(state_derivative(s, k), self.epsilon)
        report.check_below(
            "||psi1 - (Phi_dot - FD_t Phi)||_L2", fd_psi1_gap(s, rates, grid, k, profiles, self.fd_step), 1e-6,
            provenance=Provenance.DERIVED, anchor="finite-difference oracle", convention=Convention.RDR,
            step=self.fd_step,
        )

    def check_gamma_variant(self, report: Report, s: ModState, k: int, grid: RadialGrid,
                            profiles: ProfileSet) -> None:
        gamma = constants(k).gamma_k
        alt = alternate_gamma(grid, k)
        report.check_below(
            "|gamma~ - gamma| / gamma", abs(alt - gamma) / gamma, 1e-6,
            provenance=Provenance.DERIVED, anchor="modulation rates", gamma=gamma, gamma_alt=alt,
        )
        rates = state_derivative(s, k)
        base = norm_L2(psi2_from(assemble(s, grid, k, profiles), rates))
        variant = norm_L2(psi2_from(assemble(s, grid, k, profiles, gamma_mu=alt), rates))
        report.check_below(
            "||Psi_2|| with gamma~ relative to gamma", abs(variant - base) / base, np.inf,
            provenance=Provenance.DERIVED, anchor="modulation rates", gated=False,
            convention=Convention.RDR, psi2_gamma=base, psi2_gamma_alt=variant,
        )

    def check_interaction(self, report: Report, k: int, grid: RadialGrid, profiles: ProfileSet) -> None:
        nus = np.asarray(self.nus, dtype=float)
        values = {"mu": [], "lam": []}
        for nu in nus:
            pairs = interaction_pairings(assemble(ModState(mu=1.0, lam=float(nu)), grid, k, profiles))
            values["mu"].append(pairs["remainder.mu"])
            values["lam"].append(pairs["remainder.lam"])
        for tag, p in (("mu", 2 * k + 1), ("lam", 2 * k)):
            scaled = np.array(values[tag]) * nus
            ratio = scaled / envelope(nus, p)
            report.check_envelope(
                f"<Lambda Q_{tag}|remainder / r^2> against nu^{p}/lam", ratio.tolist(),
                log_slope(nus, np.maximum(ratio, 1e-300)), self.c_bound, self.slope_tol,
                anchor="interaction estimates", convention=Convention.RDR,
                exponent=fit_power(nus, scaled).exponent, claimed=p, nus=nus.tolist(), values=values[tag],
            )

    def check_energy(self, report: Report, k: int, grid: RadialGrid, profiles: ProfileSet) -> None:
        c = constants(k)
        beta = 2.0 / (k - 2)
        t = (c.q_k / self.energy_nu) ** (1.0 / beta)
        s = formal_branch([t], k).trajectory.state(0)
        energy = assemble(s, grid, k, profiles).energy()
        report.check_close(
            "E(Phi, Phi_dot) -> 8 pi k", energy, 2.0 * c.energy_q, self.energy_tol,
            provenance=Provenance.LITERATURE, anchor="threshold energy", convention=Convention.ENERGY,
            nu=s.nu,
        )

    def check_distance(self, report: Report, k: int, grid: RadialGrid, profiles: ProfileSet) -> Dict[str, np.ndarray]:
        times = self.t_min * 2.0 ** np.arange(self.dplus_points)
        traj = formal_branch(times, k).trajectory
        box = SearchBox(n_starts=2)
        values = []
        for i in range(len(traj)):
            s = traj.state(i)
            values.append(distance_plus(assemble(s, grid, k, profiles).pair, s, k, box))
        values = np.array(values)
        expected = -2.0 * (k - 1) / (k - 2)
        fit = fit_power(times, values)
        report.check_close(
            "d+ of the ansatz: exponent in t0", fit.exponent, expected, self.dplus_tol,
            provenance=Provenance.LITERATURE, anchor="initial distance", prefactor=fit.prefactor,
            values=values.tolist(),
        )
        return {"t": times, "dplus": values}

    def run(self, context: ExperimentContext) -> ExperimentResult:
        k = context.k
        report = context.new_report()
        profiles = build_profile_set(k)
        grid = context.config.grid.build()

        sweep = self.check_residual_sweep(report, k, grid, profiles)
        s0 = formal_branch([self.t_min], k).trajectory.state(0)
        self.check_finite_difference(report, s0, k, grid, profiles)
        self.check_static(report, k, grid, profiles)
        self.check_gamma_variant(report, s0, k, grid, profiles)
        self.check_interaction(report, k, grid, profiles)
        self.check_energy(report, k, grid, profiles)
        dplus = self.check_distance(report, k, grid, profiles)

        out = context.out_dir
        artifacts = [
            write_columns(out / "residual_sweep.csv", sweep),
            write_columns(out / "dplus.csv", dplus),
            export_csv(assemble(s0, grid, k, profiles), out / "ansatz.csv", state_derivative(s0, k)),
        ]
        return ExperimentResult(report, artifacts)
