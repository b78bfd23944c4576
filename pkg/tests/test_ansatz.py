import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bubblelab.core.ansatz import (
    PHI_TERMS,
    PHIDOT_TERMS,
    SearchBox,
    Term,
    alternate_gamma,
    assemble,
    distance_plus,
    distance_terms,
    export_csv,
    interaction_pairings,
    minimize_distance,
    nonlinear_split,
    psi1_from,
    static_residual,
    static_residual_direct,
    time_derivative,
    two_bubble,
)
from bubblelab.core.ansatz.distance import distance_objective
from bubblelab.core.errors import CODE_BUBBLES_NOT_SEPARATED, FatalError
from bubblelab.core.grid import PairFn, RadialGrid
from bubblelab.core.modulation import ModRates, ModState, state_derivative
from bubblelab.core.profiles import constants, ground_state

K = 4

states = st.builds(
    lambda nu, a, b: ModState(t=0.0, mu=1.0, lam=nu, a=a * nu ** (K / 2), b=b * nu ** (K / 2)),
    nu=st.floats(0.01, 0.25),
    a=st.floats(-2.0, 2.0),
    b=st.floats(-2.0, 2.0),
)


def f(u):
    return 0.5 * K**2 * np.sin(2.0 * u)


def test_term_tables():
    assert len(PHI_TERMS) == 6
    assert len(PHIDOT_TERMS) == 12
    assert len({t.name for t in PHIDOT_TERMS}) == 12
    with pytest.raises(ValueError):
        Term("bad", 1.0, "C", "X", "lam", False)


def test_separation_required(coarse_grid, profiles):
    with pytest.raises(FatalError) as e:
        assemble(ModState(mu=1.0, lam=0.3), coarse_grid, K, profiles)
    assert e.value.code == CODE_BUBBLES_NOT_SEPARATED


def test_two_bubble_matches_difference(coarse_grid):
    r = coarse_grid.r
    direct = ground_state(K, r / 0.05) - ground_state(K, r)
    assert np.allclose(two_bubble(K, r, 0.05, 1.0), direct, atol=1e-14)


@settings(max_examples=20, deadline=None)
@given(s=states)
def test_nonlinear_split_identity(profiles, coarse_grid, s):
    ansatz = assemble(s, coarse_grid, K, profiles)
    r = coarse_grid.r
    q_lam, q_mu = ground_state(K, r / s.lam), ground_state(K, r / s.mu)
    lhs = (
        f(ansatz.phi.values) - f(q_lam) + f(q_mu)
        - K**2 * np.cos(2.0 * q_lam) * ansatz.correction_lam
        - K**2 * np.cos(2.0 * q_mu) * ansatz.correction_mu
    )
    split = nonlinear_split(ansatz)
    assert np.allclose(lhs, split.interaction + split.quadratic + split.cross, rtol=0.0, atol=1e-10 * K**2)
    assert np.allclose(split.interaction, split.dipole_lam + split.dipole_mu + split.remainder,
                       rtol=1e-10, atol=1e-12 * K**2)


@settings(max_examples=10, deadline=None)
@given(s=states)
def test_static_residual_forms_agree(profiles, coarse_grid, s):
    ansatz = assemble(s, coarse_grid, K, profiles)
    r2 = coarse_grid.r**2
    diff = (static_residual(ansatz) - static_residual_direct(ansatz)) * r2
    assert np.max(np.abs(diff)) < 1e-9 * K**2


def test_psi1_vanishes_on_the_modulation_system(profiles, coarse_grid, state):
    ansatz = assemble(state, coarse_grid, K, profiles)
    psi1 = psi1_from(ansatz, state_derivative(state, K))
    assert np.max(np.abs(psi1.values)) < 1e-12


@settings(max_examples=10, deadline=None)
@given(s=states, rates=st.tuples(*[st.floats(-1e-2, 1e-2)] * 4))
def test_psi1_is_velocity_mismatch(profiles, coarse_grid, s, rates):
    ansatz = assemble(s, coarse_grid, K, profiles)
    d = ModRates(*rates)
    direct = ansatz.phidot.values - time_derivative(ansatz, d, PHI_TERMS)
    scale = np.max(np.abs(direct)) + 1e-300
    assert np.allclose(psi1_from(ansatz, d).values, direct, rtol=0.0, atol=1e-10 * scale)


def test_energy_of_separated_bubbles(profiles, grid):
    s = ModState(mu=1.0, lam=0.01)
    energy = assemble(s, grid, K, profiles).energy()
    assert energy == pytest.approx(2.0 * constants(K).energy_q, rel=1e-5)


def test_alternate_gamma(grid):
    assert alternate_gamma(grid, K) == pytest.approx(constants(K).gamma_k, rel=1e-8)


def test_interaction_pairings(profiles, coarse_grid, state):
    values = interaction_pairings(assemble(state, coarse_grid, K, profiles))
    assert set(values) == {f"{n}.{s}" for n in ("remainder", "quadratic", "cross") for s in ("mu", "lam")}
    assert all(np.isfinite(v) and v >= 0.0 for v in values.values())


def test_export_csv(profiles, coarse_grid, state, tmp_path):
    ansatz = assemble(state, coarse_grid, K, profiles)
    path = export_csv(ansatz, tmp_path / "ansatz.csv", state_derivative(state, K))
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["r", "phi", "phidot", "psi1", "psi2"]
    assert len(rows) == coarse_grid.n + 1


def test_distance_vanishes_on_the_family(profiles, coarse_grid):
    s = ModState(mu=1.0, lam=0.05)
    u = assemble(s, coarse_grid, K, profiles).pair
    u = PairFn(u.pos.with_values(two_bubble(K, coarse_grid.r, s.lam, s.mu)), u.vel * 0.0)
    terms = distance_terms(u, s, K)
    assert terms["position"] < 1e-12
    assert terms["velocity"] < 1e-12
    assert terms["separation"] == pytest.approx(0.05**K)


def test_minimize_distance_improves_on_seed(profiles):
    grid = RadialGrid(1e-3, 1e3, 256)
    s = ModState(mu=1.0, lam=0.05, a=1e-3, b=2e-3)
    u = assemble(s, grid, K, profiles).pair
    result = minimize_distance(u, s, K, SearchBox(n_starts=2), xatol=1e-6)
    assert result.value <= distance_objective(u, s, K)
    assert result.state.lam == pytest.approx(s.lam, rel=0.2)


def test_distance_plus_of_an_ansatz_is_small(profiles):
    grid = RadialGrid(1e-3, 1e3, 256)
    s = ModState(mu=1.0, lam=0.05, a=1e-3, b=2e-3)
    u = assemble(s, grid, K, profiles).pair
    assert distance_plus(u, s, K, SearchBox(n_starts=1)) <= distance_objective(u, s, K)
