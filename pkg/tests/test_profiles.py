import numpy as np
import pytest

from bubblelab.core.errors import (
    CODE_PARAMETER_RANGE,
    CODE_SOLVABILITY_VIOLATION,
    CODE_UNKNOWN_PAIRING,
    FatalError,
    RecoverableError,
)
from bubblelab.core.grid import RadialGrid, inner
from bubblelab.core.profiles import (
    PAIRING_REGISTRY,
    constants,
    constants_oracle,
    cutoff_le1,
    pairing_sweep,
    solve_linearized,
    sweep_pairing,
)
from bubblelab.core.profiles.pairings import ASYMPTOTIC_NU, asymptotic_window
from bubblelab.core.profiles.ground_state import (
    cubic_moment_oracle,
    ground_state,
    ground_state_complement,
    lambda_q_fn,
)
from bubblelab.core.profiles.profile_set import source_values
from bubblelab.experiments.profiles import end_fits, kernel_residual, profile_residual


@pytest.mark.parametrize("k", [4, 5, 6, 9])
def test_constants_match_extended_precision(k):
    c = constants(k)
    oracle = constants_oracle(k)
    for name in ("rho_k", "gamma_k", "q_k", "lamQ_L2sq"):
        assert getattr(c, name) == pytest.approx(float(oracle[name]), rel=1e-12)


def test_energy_of_ground_state(k):
    assert constants(k).energy_q == pytest.approx(4.0 * np.pi * k)


@pytest.mark.parametrize("sign", [1, -1])
def test_cubic_moments(k, sign):
    assert float(cubic_moment_oracle(k, sign)) == pytest.approx(2.0 * k**2, rel=1e-12)


def test_ground_state_and_complement(k):
    r = np.logspace(-3, 3, 61)
    assert np.allclose(ground_state(k, r) + ground_state_complement(k, r), np.pi, atol=1e-14)
    assert ground_state(k, np.array([1.0]))[0] == pytest.approx(np.pi / 2)


def test_lambda_q_spans_kernel(grid, k):
    assert kernel_residual(grid, k) < 1e-5


def test_cutoff_le1():
    r = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 5.0])
    chi = cutoff_le1(r)
    assert chi[:3] == pytest.approx([1.0, 1.0, 1.0])
    assert chi[3] == pytest.approx(0.5)
    assert chi[4:] == pytest.approx([0.0, 0.0])


def test_solvability_enforced(k):
    grid = RadialGrid(1e-5, 1e5, 2048)
    with pytest.raises(RecoverableError) as e:
        solve_linearized(lambda_q_fn(grid, k), k)
    assert e.value.code == CODE_SOLVABILITY_VIOLATION


def test_unknown_source():
    with pytest.raises(KeyError):
        source_values("C", 4, np.array([1.0]))


@pytest.mark.parametrize("name", ["A", "B", "Btilde"])
def test_profiles_solve_their_equation(profiles, k, name):
    profile = getattr(profiles, name)
    assert profile_residual(profile, k) < 1e-5
    g = lambda_q_fn(profile.grid, k)
    assert abs(inner(profile.solution, g)) < 1e-8


@pytest.mark.parametrize("name", ["A", "B", "Btilde"])
def test_profile_decay_at_infinity(profiles, k, name):
    fits = end_fits(getattr(profiles, name), k)
    assert fits["infinity"].exponent == pytest.approx(2.0 - k, abs=0.05)


@pytest.mark.parametrize("name", ["A", "B", "Btilde"])
def test_profile_growth_at_zero(profiles, k, name):
    profile = getattr(profiles, name)
    fits = end_fits(profile, k)
    assert fits["zero"].exponent == pytest.approx(float(k), abs=0.05)
    assert profile.log0 == (name == "Btilde")


def test_profile_evaluate_agrees_with_table(profiles):
    A = profiles.A
    r = A.grid.r[::997]
    assert np.allclose(A.evaluate(r), A.solution.values[::997], rtol=1e-10, atol=0.0)
    # power-law extension past the ends
    beyond = A.grid.r[-1] * np.array([10.0, 100.0])
    ratio = A.evaluate(beyond) / A.solution.values[-1]
    assert ratio == pytest.approx(np.array([10.0, 100.0]) ** A.exp_inf, rel=1e-12)


def test_profile_on_rescaled_grid(profiles, coarse_grid):
    B = profiles.B
    lam = 0.1
    plain = B.on(coarse_grid, lam)
    scaled = B.on(coarse_grid, lam, l2=True)
    assert np.allclose(scaled.values, plain.values / lam)


def test_registry_is_populated():
    assert "scaled.LQl.LQm" in PAIRING_REGISTRY
    families = {spec.family for spec in PAIRING_REGISTRY.values()}
    assert families == {"scaled", "potential", "weighted", "mixed"}


def test_bubble_overlap_sweep(profiles, k):
    sweep = sweep_pairing("scaled.LQl.LQm", k=k, profiles=profiles)
    assert sweep.passed
    assert sweep.exponent == k - 1
    report = pairing_sweep("scaled.LQl.LQm", k=k, profiles=profiles)
    assert report.passed


def test_unknown_pairing():
    with pytest.raises(FatalError) as e:
        sweep_pairing("scaled.nothing")
    assert e.value.code == CODE_UNKNOWN_PAIRING


def test_pairing_rejects_large_nu(profiles):
    with pytest.raises(FatalError) as e:
        sweep_pairing("scaled.LQl.LQm", nus=(0.5,), profiles=profiles)
    assert e.value.code == CODE_PARAMETER_RANGE


@pytest.mark.parametrize("pair_id", sorted(PAIRING_REGISTRY))
def test_pairing_sweeps_hold(profiles, grid, k, pair_id):
    sweep = sweep_pairing(pair_id, k=k, grid=grid, profiles=profiles)
    assert sweep.passed, f"slope={sweep.slope:.3f} max_ratio={sweep.max_ratio:.3g}"
    assert np.all(sweep.nus[sweep.window] <= ASYMPTOTIC_NU)


@pytest.mark.parametrize(
    "nus, expected",
    [
        ((0.3, 0.1, 0.01, 1e-3), [False, False, True, True]),
        ((0.3, 0.1, 0.03), [False, True, True]),
        ((0.01,), [True]),
    ],
)
def test_asymptotic_window(nus, expected):
    assert asymptotic_window(np.asarray(nus)).tolist() == expected


def test_large_nu_stays_out_of_the_gate(profiles, grid, k):
    pair_id = "pair.LQmBtm.LQl2"
    tail = sweep_pairing(pair_id, nus=(0.01, 1e-3, 1e-4), k=k, grid=grid, profiles=profiles)
    full = sweep_pairing(pair_id, nus=(0.3, 0.1, 0.01, 1e-3, 1e-4), k=k, grid=grid, profiles=profiles)
    assert full.slope == pytest.approx(tail.slope)
    assert full.max_ratio == pytest.approx(tail.max_ratio)
    assert tail.max_ratio >= 1.0
    report = pairing_sweep(pair_id, nus=(0.3, 0.1, 0.01, 1e-3, 1e-4), k=k, grid=grid, profiles=profiles)
    assert report.claims[-1].details["window"] == [False, False, True, True, True]
