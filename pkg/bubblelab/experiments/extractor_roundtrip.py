from dataclasses import dataclass
from typing import List

import numpy as np

from bubblelab.core.ansatz import SearchBox, assemble, distance_plus
from bubblelab.core.errors import NumericalError
from bubblelab.core.evolver.models import FieldState
from bubblelab.core.extractor import Decomposition, ExtractorOptions, decompose
from bubblelab.core.functionals.energy_virial import orthogonal_battery
from bubblelab.core.grid import PairFn, RadialGrid, norm_L2, norm_pair_H
from bubblelab.core.modulation.models import ModState
from bubblelab.core.profiles.ground_state import constants
from bubblelab.core.profiles.profile_set import ProfileSet, build_profile_set
from bubblelab.core.report import Convention, Provenance, Report, write_columns
from bubblelab.experiments.base import Experiment, ExperimentContext, ExperimentResult


def random_states(rng: np.random.Generator, n: int, k: int, nu_range=(0.01, 0.2)) -> List[ModState]:
    """mu log-uniform in [0.5, 2], nu log-uniform in nu_range, |a|, |b| <= 2 nu^(k/2)."""
    out = []
    for _ in range(n):
        mu = float(np.exp(rng.uniform(np.log(0.5), np.log(2.0))))
        nu = float(np.exp(rng.uniform(*np.log(nu_range))))
        a, b = rng.uniform(-2.0, 2.0, 2) * nu ** (k / 2.0)
        out.append(ModState(mu=mu, lam=nu * mu, a=float(a), b=float(b)))
    return out


def nudged(s: ModState, rng: np.random.Generator, k: int, size: float = 0.01) -> ModState:
    """A guess off the true state by `size` in log scale and 10 `size` in the rescaled velocities."""
    unit = s.nu ** (k / 2.0)
    dm, dl = rng.uniform(-size, size, 2)
    da, db = rng.uniform(-10.0 * size, 10.0 * size, 2) * unit
    return s.model_copy(update={"mu": s.mu * np.exp(dm), "lam": s.lam * np.exp(dl), "a": s.a + da, "b": s.b + db})


def relative_shift(s: ModState, ref: ModState, k: int) -> float:
    unit = ref.nu ** (k / 2.0)
    return float(max(
        abs(s.mu / ref.mu - 1.0), abs(s.lam / ref.lam - 1.0),
        abs(s.a - ref.a) / unit, abs(s.b - ref.b) / unit,
    ))


def relative_orthogonality(d: Decomposition) -> float:
    """The four pairings over ||Lambda Q|| times the norm of the paired component."""
    scale = np.sqrt(constants(d.k).kappa)
    pos, vel = max(norm_L2(d.w.pos), 1e-300), max(norm_L2(d.w.vel), 1e-300)
    pairs = d.orthogonality()
    return float(max(abs(pairs[0]) / pos, abs(pairs[1]) / pos, abs(pairs[2]) / vel, abs(pairs[3]) / vel) / scale)


def shifted_pair(u: PairFn, nodes: int) -> PairFn:
    """
    (u(r/s), s^-1 u_dot(r/s)) for s = exp(nodes dx): an exact shift by whole
    grid nodes, zero-filled where the shift runs past the grid ends.
    """
    s = float(np.exp(nodes * u.grid.dx))

    def move(v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v)
        if nodes >= 0:
            out[nodes:] = v[: len(v) - nodes]
        else:
            out[:nodes] = v[-nodes:]
        return out

    return PairFn(u.pos.with_values(move(u.pos.values)), u.vel.with_values(move(u.vel.values) / s))


@dataclass
class ExtractorRoundtripExperiment(Experiment):
    experiment_id = "extractor-roundtrip"

    n_states: int = 100
    n_perturbed: int = 10
    n_suite: int = 50
    epsilon: float = 1e-3
    w_tol: float = 1e-9
    c_bound: float = 1e3

    def description(self) -> str:
        return "Orthogonality decomposition: round trip, perturbation, idempotence, scaling and the w-d+ bound"

    def check_roundtrip(self, report: Report, states: List[ModState], rng: np.random.Generator, k: int,
                        grid: RadialGrid, profiles: ProfileSet) -> dict:
        w_norms, shifts, iters = [], [], []
        for s in states:
            field = FieldState.from_pair(assemble(s, grid, k, profiles).pair)
            d = decompose(field, k, nudged(s, rng, k), profiles=profiles)
            w_norms.append(norm_pair_H(d.w, k))
            shifts.append(relative_shift(d.state, s, k))
            iters.append(d.newton.iterations)
        report.check_below(
            f"max ||w||_H over {len(states)} round trips", max(w_norms), self.w_tol,
            provenance=Provenance.TRIVIAL, anchor="orthogonality decomposition", convention=Convention.RDR,
        )
        report.check_below(
            "max relative parameter error of the round trip", max(shifts), 1e-8,
            provenance=Provenance.TRIVIAL, anchor="orthogonality decomposition",
            max_newton_iterations=int(max(iters)),
        )
        return {"mu": [s.mu for s in states], "lam": [s.lam for s in states], "a": [s.a for s in states],
                "b": [s.b for s in states], "wH": w_norms, "shift": shifts, "iterations": iters}

    def check_perturbed(self, report: Report, states: List[ModState], k: int, grid: RadialGrid,
                        profiles: ProfileSet, seed: int) -> None:
        options = ExtractorOptions()
        orth, shifts, dominance, idem = [], [], [], []
        for i, s in enumerate(states):
            bump = orthogonal_battery(s, grid, k, n=1, seed=seed + i)[0]
            field = FieldState.from_pair(assemble(s, grid, k, profiles).pair + bump * self.epsilon)
            d = decompose(field, k, s, options, profiles)
            orth.append(relative_orthogonality(d))
            shifts.append(relative_shift(d.state, s, k))
            dominance.append(d.newton.dominance)
            again = decompose(FieldState.from_pair(assemble(d.state, grid, k, profiles).pair + d.w), k,
                              d.state, options, profiles)
            idem.append(relative_shift(again.state, d.state, k))
        report.check_below(
            "orthogonality residual after an orthogonal perturbation", max(orth), options.orth_tol,
            provenance=Provenance.DERIVED, anchor="orthogonality decomposition", convention=Convention.RDR,
            epsilon=self.epsilon,
        )
        report.check_below(
            "parameter shift / epsilon", max(shifts) / self.epsilon, 1.0,
            provenance=Provenance.DERIVED, anchor="orthogonality decomposition",
        )
        report.check_above(
            "Jacobian dominance ratio", min(dominance), 2.0,
            provenance=Provenance.LITERATURE, anchor="orthogonality decomposition",
        )
        report.check_below(
            "idempotence of decompose", max(idem), 1e-8,
            provenance=Provenance.TRIVIAL, anchor="orthogonality decomposition",
        )

    def check_scaling(self, report: Report, s: ModState, k: int, grid: RadialGrid, profiles: ProfileSet,
                      seed: int) -> None:
        bump = orthogonal_battery(s, grid, k, n=1, seed=seed)[0]
        u = assemble(s, grid, k, profiles).pair + bump * self.epsilon
        base = decompose(FieldState.from_pair(u), k, s, profiles=profiles).state
        errors = []
        for direction in (-1, 1):
            nodes = direction * int(round(np.log(2.0) / grid.dx))
            scale = float(np.exp(nodes * grid.dx))
            moved = decompose(FieldState.from_pair(shifted_pair(u, nodes)), k, s.rescaled(scale),
                              profiles=profiles).state
            errors.append(relative_shift(moved, base.rescaled(scale), k))
        report.check_below(
            "scales follow an exact rescaling, a and b invariant", max(errors), 1e-8,
            provenance=Provenance.DERIVED, anchor="scaling symmetry",
        )

    def check_distance_bound(self, report: Report, states: List[ModState], rng: np.random.Generator, k: int,
                             grid: RadialGrid, profiles: ProfileSet, seed: int) -> dict:
        box = SearchBox(n_starts=1, seed=seed)
        ratios, amplitudes = [], []
        for i, s in enumerate(states):
            amplitude = float(10.0 ** rng.uniform(-4.0, -2.0)) * s.nu ** (k / 2.0)
            bump = orthogonal_battery(s, grid, k, n=1, seed=seed + 1000 + i)[0]
            field = FieldState.from_pair(assemble(s, grid, k, profiles).pair + bump * amplitude)
            try:
                d = decompose(field, k, s, profiles=profiles)
                dplus = distance_plus(field.pair, s, k, box)
            except NumericalError as e:
                report.notes.append(f"w-d+ sample {i} skipped: {e.message}")
                continue
            lhs = d.norms["wH"] + s.nu ** (-k / 2.0) * d.norms["wdotL2"]
            ratios.append(lhs / dplus)
            amplitudes.append(amplitude)
        report.check_below(
            f"(||w||_H + nu^(-k/2) ||w_dot||) / d+ over {len(ratios)} samples", max(ratios), self.c_bound,
            provenance=Provenance.LITERATURE, anchor="distance control of the remainder",
            convention=Convention.RDR, n_samples=len(ratios), median=float(np.median(ratios)),
        )
        report.check_above(
            "w-d+ suite samples", len(ratios), 0.9 * len(states),
            provenance=Provenance.TRIVIAL, anchor="distance control of the remainder",
        )
        return {"amplitude": amplitudes, "ratio": ratios}

    def run(self, context: ExperimentContext) -> ExperimentResult:
        k = context.k
        seed = context.config.seed
        report = context.new_report()
        profiles = build_profile_set(k)
        grid = context.config.grid.build()
        rng = np.random.default_rng(seed)

        states = random_states(rng, self.n_states, k)
        roundtrip = self.check_roundtrip(report, states, rng, k, grid, profiles)
        self.check_perturbed(report, states[: self.n_perturbed], k, grid, profiles, seed)
        self.check_scaling(report, states[0], k, grid, profiles, seed)
        suite = self.check_distance_bound(report, random_states(rng, self.n_suite, k), rng, k, grid, profiles, seed)

        out = context.out_dir
        artifacts = [write_columns(out / "roundtrip.csv", roundtrip), write_columns(out / "w_d_bound.csv", suite)]
        return ExperimentResult(report, artifacts)
