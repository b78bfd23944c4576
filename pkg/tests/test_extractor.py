import csv

import numpy as np
import pytest

from bubblelab.core.ansatz import assemble
from bubblelab.core.errors import (
    CODE_INSUFFICIENT_DATA,
    CODE_NOT_NEAR_MANIFOLD,
    NumericalError,
    RecoverableError,
)
from bubblelab.core.evolver import FieldState
from bubblelab.core.extractor import (
    Decomposition,
    DecompositionSeries,
    ExtractorOptions,
    NewtonReport,
    cold_start,
    decompose,
    dominance_ratio,
    modulation_bounds,
    remainder_fn,
    residual_monitor,
    track,
)
from bubblelab.core.grid import PairFn, RadialFn
from bubblelab.core.modulation import ModState, formal_branch
from bubblelab.core.profiles import constants

K = 4


def field_of(state: ModState, grid, profiles, w: PairFn = None) -> FieldState:
    pair = assemble(state, grid, K, profiles).pair
    if w is not None:
        pair = pair + w
    return FieldState.from_pair(pair, t=state.t)


def test_exact_ansatz_round_trip(profiles, coarse_grid, state):
    field = field_of(state, coarse_grid, profiles)
    guess = state.model_copy(update={"lam": state.lam * 1.02, "mu": 0.99, "b": state.b * 0.9})
    d = decompose(field, K, guess, profiles=profiles)
    assert d.state.lam == pytest.approx(state.lam, rel=1e-8)
    assert d.state.mu == pytest.approx(state.mu, rel=1e-8)
    assert d.state.a == pytest.approx(state.a, rel=1e-6, abs=1e-12)
    assert d.state.b == pytest.approx(state.b, rel=1e-6, abs=1e-12)
    assert d.norms["wH"] < 1e-8
    assert d.newton.residual <= ExtractorOptions().orth_tol * constants(K).kappa


def test_cold_start_finds_both_bubbles(profiles, coarse_grid, state):
    guess = cold_start(field_of(state, coarse_grid, profiles), K)
    assert guess.lam == pytest.approx(state.lam, rel=0.05)
    assert guess.mu == pytest.approx(state.mu, rel=0.05)
    assert guess.t == state.t


def test_cold_start_needs_two_bubbles(coarse_grid):
    zero = FieldState.from_values(coarse_grid, np.zeros(coarse_grid.n), np.zeros(coarse_grid.n), 0.0, K)
    with pytest.raises(RecoverableError) as e:
        cold_start(zero, K)
    assert e.value.code == CODE_NOT_NEAR_MANIFOLD


def test_remainder_is_orthogonal(profiles, coarse_grid, state):
    x = coarse_grid.x
    bump = assemble(state, coarse_grid, K, profiles).phi.with_values(1e-4 * np.exp(-((x + 1.0) ** 2)))
    field = field_of(state, coarse_grid, profiles, PairFn(bump, bump * 0.1))
    d = decompose(field, K, state, profiles=profiles)
    kappa = constants(K).kappa
    assert np.all(np.abs(d.orthogonality()) < 1e-8 * kappa)
    assert d.norms["wH"] > 0.0
    # w is what is left after subtracting the ansatz
    w = remainder_fn(field, d.state, K, profiles)
    assert np.allclose(w.pos.values, d.w.pos.values)


def test_nonconvergence_is_recoverable(profiles, coarse_grid, state):
    field = field_of(state, coarse_grid, profiles)
    options = ExtractorOptions(max_iter=1, orth_tol=1e-15, newton_tol=1e-16)
    far = state.model_copy(update={"lam": state.lam * 1.5})
    with pytest.raises(RecoverableError):
        decompose(field, K, far, options, profiles)


def test_dominance_ratio():
    assert dominance_ratio(np.diag([2.0, 3.0])) > 1e100
    J = np.array([[2.0, 1.0], [4.0, 1.0]])
    assert dominance_ratio(J) == pytest.approx(0.25)


def test_track_warm_starts(profiles, coarse_grid, state):
    later = state.model_copy(update={"t": state.t + 1.0, "lam": state.lam * 0.99})
    fields = [field_of(s, coarse_grid, profiles) for s in (state, later)]
    series = track(fields, K, state, profiles=profiles)
    assert len(series) == 2
    assert series.t.tolist() == [state.t, later.t]
    assert series.column("lam")[1] == pytest.approx(later.lam, rel=1e-8)
    traj = series.trajectory()
    assert traj.nu[0] == pytest.approx(state.nu, rel=1e-8)


def test_series_csv(profiles, coarse_grid, state, tmp_path):
    series = track([field_of(state, coarse_grid, profiles)], K, state, profiles=profiles)
    path = series.to_csv(tmp_path / "decomposition.csv")
    with open(path) as fh:
        header = next(csv.reader(fh))
    assert header[:6] == ["t", "mu", "lam", "a", "b", "nu"]
    assert "wLamInvH" in header


def test_residual_monitor_needs_samples():
    with pytest.raises(NumericalError) as e:
        residual_monitor(DecompositionSeries([]), K)
    assert e.value.code == CODE_INSUFFICIENT_DATA


def branch_series(grid, times, b_offset: float = 0.0) -> DecompositionSeries:
    zero = PairFn(RadialFn.zeros(grid), RadialFn.zeros(grid))
    traj = formal_branch(times, K).trajectory
    decompositions = []
    for i in range(len(traj.t)):
        s = traj.state(i)
        s = s.model_copy(update={"b": s.b + b_offset})
        decompositions.append(Decomposition(s, zero, NewtonReport(0, 0.0, 1e300, True), K))
    return DecompositionSeries(decompositions)


def test_bound_ratios_are_gated_on_the_branch(coarse_grid):
    series = branch_series(coarse_grid, np.linspace(20.0, 30.0, 101))
    ratios = modulation_bounds(series, K)
    assert set(ratios) == {"mu'-a", "lam'+b", "a'+gamma nu^k/mu", "b'+gamma nu^k/lam"}
    report = residual_monitor(series, K)
    bound_claims = [c for c in report.claims if c.name.startswith("bound ratio")]
    assert len(bound_claims) == 4
    assert all(c.gated and np.isfinite(c.reference) for c in bound_claims)
    assert all(c.passed for c in bound_claims), [(c.name, c.measured) for c in bound_claims]


def test_bound_ratio_catches_inconsistent_rates(coarse_grid):
    series = branch_series(coarse_grid, np.linspace(20.0, 30.0, 101), b_offset=1e-3)
    report = residual_monitor(series, K)
    failed = {c.name for c in report.failed_claims()}
    assert "bound ratio lam'+b" in failed
    assert not report.passed
