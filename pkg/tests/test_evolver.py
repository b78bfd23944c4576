import numpy as np
import pytest

from bubblelab.core.errors import CODE_INVALID_INPUT, FatalError
from bubblelab.core.evolver import (
    FieldState,
    Scheme,
    SolverConfig,
    WaveOperator,
    energy,
    evolve,
    load_series,
    rhs_field,
    step,
)
from bubblelab.core.grid import RadialFn, RadialGrid, norm_H, norm_L2
from bubblelab.core.profiles import ground_state

K = 4


@pytest.fixture(scope="module")
def small_grid() -> RadialGrid:
    return RadialGrid(1e-2, 1e2, 400)


def bump(grid: RadialGrid, amplitude: float) -> np.ndarray:
    return amplitude * np.exp(-2.0 * grid.x**2)


@pytest.fixture
def ground(small_grid) -> FieldState:
    return FieldState.from_values(small_grid, ground_state(K, small_grid.r), np.zeros(small_grid.n), 0.0, K)


@pytest.fixture
def perturbed(small_grid) -> FieldState:
    u = ground_state(K, small_grid.r) + bump(small_grid, 0.01)
    return FieldState.from_values(small_grid, u, bump(small_grid, 0.02), 0.0, K)


def test_ground_state_is_stationary(ground):
    assert np.max(np.abs(rhs_field(ground, K).values)) < 1e-3
    run = evolve(ground, 0.05, K)
    assert not run.blew_up
    drift = np.abs(run.states[-1].u.values - ground.u.values)
    assert np.max(drift) < 1e-6


@pytest.mark.parametrize("scheme", [Scheme.VERLET, Scheme.IMEX])
def test_step_is_reversible(perturbed, scheme):
    dt = 1e-4
    forward = step(perturbed, dt, K, scheme)
    back = step(forward, -dt, K, scheme)
    assert back.t == pytest.approx(0.0, abs=1e-15)
    assert np.allclose(back.u.values, perturbed.u.values, rtol=0.0, atol=1e-10)
    assert np.allclose(back.ut.values, perturbed.ut.values, rtol=0.0, atol=1e-8)


@pytest.mark.parametrize(
    "config",
    [SolverConfig(), SolverConfig(scheme=Scheme.IMEX, dt=2e-4)],
    ids=["verlet", "imex"],
)
def test_energy_conserved(perturbed, config):
    run = evolve(perturbed, 0.2, K, config.model_copy(update={"energy_every": 10}))
    assert run.energy[0] == pytest.approx(energy(perturbed, K))
    assert len(run.energy) > 2
    assert run.energy_drift < 1e-4


def test_evolution_runs_backward(perturbed):
    run = evolve(perturbed, -0.05, K, SolverConfig(snapshot_interval=0.01))
    assert run.dt < 0
    assert np.all(np.diff(run.times) < 0)
    assert run.times[-1] == pytest.approx(-0.05)


def test_imex_needs_dt(perturbed):
    with pytest.raises(FatalError) as e:
        evolve(perturbed, 0.1, K, SolverConfig(scheme=Scheme.IMEX))
    assert e.value.code == CODE_INVALID_INPUT


def test_blow_up_stops_run(ground):
    run = evolve(ground, 0.05, K, SolverConfig(blowup_threshold=1.0))
    assert run.blew_up
    assert len(run.states) == 1


def test_stable_step_scales_with_inner_radius(small_grid):
    coarse = WaveOperator(small_grid, K).stable_step()
    finer = WaveOperator(RadialGrid(1e-3, 1e2, 400), K).stable_step()
    assert finer < coarse


def test_save_and_load(perturbed, tmp_path):
    run = evolve(perturbed, 0.02, K, SolverConfig(snapshot_interval=0.005))
    manifest = run.save(tmp_path, config_hash="abc")
    assert manifest.name == "manifest.json"
    loaded = load_series(tmp_path, K)
    assert len(loaded) == len(run)
    for a, b in zip(loaded, run.states):
        assert a.t == b.t
        assert np.array_equal(a.u.values, b.u.values)
        assert np.array_equal(a.ut.values, b.ut.values)


def test_mismatched_pair_rejected(small_grid):
    other = RadialGrid(1e-2, 1e2, 401)
    with pytest.raises(FatalError):
        FieldState(RadialFn.zeros(small_grid), RadialFn.zeros(other))


def test_zero_data_stays_zero(small_grid):
    zero = FieldState.from_values(small_grid, np.zeros(small_grid.n), np.zeros(small_grid.n), 0.0, K)
    run = evolve(zero, 0.05, K)
    assert not np.any(run.states[-1].u.values)
    assert not np.any(run.states[-1].ut.values)


def test_small_data_oscillates_at_the_free_frequency(small_grid):
    op = WaveOperator(small_grid, K)
    eigenvalues, vectors = np.linalg.eig(op.matrix.toarray()[:-1, :-1])
    lowest = np.argmax(eigenvalues.real)
    mode = np.append(vectors[:, lowest].real, 0.0)
    mode /= np.max(np.abs(mode))

    # the mode is the L0 minimizer on the truncated grid
    f = RadialFn(small_grid, mode, float(K), False, None)
    omega = np.sqrt(norm_H(f, K) ** 2 / norm_L2(f) ** 2)
    assert omega**2 == pytest.approx(-eigenvalues[lowest].real, rel=0.01)

    eps, T = 1e-6, 10.0
    s0 = FieldState.from_values(small_grid, eps * mode, np.zeros(small_grid.n), 0.0, K)
    run = evolve(s0, T, K, SolverConfig(snapshot_interval=T))
    ratio = np.dot(run.states[-1].u.values, mode) / (eps * np.dot(mode, mode))
    assert np.arccos(ratio) / T == pytest.approx(omega, rel=0.01)
