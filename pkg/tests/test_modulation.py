import numpy as np
import pytest
from pydantic import ValidationError

from bubblelab.core.errors import CODE_INVALID_INPUT, FatalError
from bubblelab.core.modulation import (
    ModState,
    Trajectory,
    analytic_approx,
    asymptotic_state,
    formal_branch,
    formal_state,
    hamiltonian,
    integrate,
    state_derivative,
)
from bubblelab.core.profiles import constants


def test_scales_must_be_positive():
    with pytest.raises(ValidationError):
        ModState(mu=1.0, lam=0.0)
    with pytest.raises(ValidationError):
        ModState(mu=-1.0, lam=0.1)


def test_state_is_frozen(state):
    with pytest.raises(ValidationError):
        state.lam = 0.2


def test_rescaled(state):
    s = state.rescaled(3.0)
    assert (s.mu, s.lam) == pytest.approx((3.0 * state.mu, 3.0 * state.lam))
    assert (s.a, s.b, s.t) == (state.a, state.b, state.t)
    assert s.nu == pytest.approx(state.nu)


def test_vector_round_trip(state):
    assert ModState.from_vector(state.t, state.as_vector()) == state


def test_trajectory_times_monotone():
    z = np.zeros(3)
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 2.0, 1.0]), z + 1, z + 1, z, z)
    # backward runs are fine
    assert len(Trajectory(np.array([2.0, 1.0, 0.0]), z + 1, z + 1, z, z)) == 3


def test_rates(state, k):
    d = state_derivative(state, k)
    gamma = constants(k).gamma_k
    assert d.mu == state.a
    assert d.lam == -state.b
    assert d.b == pytest.approx(-gamma * state.lam ** (k - 1) * state.mu ** (-k))


@pytest.mark.parametrize("k", [4, 5, 6])
def test_hamiltonian_conserved(k):
    s0 = formal_state(10.0, k)
    traj = integrate(s0, 200.0, k, tol=1e-11)
    scale = abs(hamiltonian(s0, k)) + s0.b**2
    assert traj.meta["hamiltonian_drift"] < 1e-8 * scale
    assert not traj.meta["collapsed"]


@pytest.mark.parametrize("k", [4, 6])
def test_formal_branch_solves_the_system(k):
    s0 = formal_state(20.0, k)
    traj = integrate(s0, 80.0, k, tol=1e-12)
    end = traj.state(len(traj) - 1)
    expected = formal_state(80.0, k)
    assert end.lam == pytest.approx(expected.lam, rel=1e-7)
    assert end.b == pytest.approx(expected.b, rel=1e-7)
    assert end.mu == pytest.approx(expected.mu, rel=1e-9)


def test_formal_branch_approaches_approximants(k):
    times = np.geomspace(10.0, 1e6, 9)
    branch = formal_branch(times, k)
    rel = np.abs(branch.dev_lam / branch.lam_tilde)
    assert np.all(np.diff(rel) < 0)
    assert rel[-1] < 1e-4
    late = analytic_approx(1e6, k)
    assert branch.trajectory.lam[-1] == pytest.approx(late.lam, rel=1e-4)


def test_asymptotic_power_laws(k):
    c = constants(k)
    beta = 2.0 / (k - 2)
    s = asymptotic_state(100.0, k)
    assert s.lam == pytest.approx(c.q_k * 100.0 ** (-beta))
    assert s.b == pytest.approx(beta * c.q_k * 100.0 ** (-beta - 1.0))
    # b = -lam' along the branch
    assert formal_state(1e5, k).b == pytest.approx(asymptotic_state(1e5, k).b, rel=1e-3)


def test_branch_times_beyond_anchor():
    with pytest.raises(FatalError) as e:
        formal_branch([1e9], 4, t_anchor=1e8)
    assert e.value.code == CODE_INVALID_INPUT


def test_lam_collapse_stops_integration(k):
    s0 = ModState(t=0.0, mu=1.0, lam=0.01, a=0.0, b=1.0)
    traj = integrate(s0, 10.0, k)
    assert traj.meta["collapsed"]
    assert traj.t[-1] < 10.0
