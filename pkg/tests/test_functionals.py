import numpy as np
import pytest

from bubblelab.core.ansatz import assemble
from bubblelab.core.errors import CODE_INVALID_INPUT, CODE_PARAMETER_RANGE, FatalError
from bubblelab.core.functionals import (
    CoercivitySetup,
    CutoffP,
    VirialOp,
    apply_A,
    boundedness,
    build_cutoff,
    coercivity_rayleigh,
    energy_virial,
    functional_H1,
    gaussian_battery,
    l0_a0_discrepancy,
    orthogonal_battery,
    pohozaev_check,
    rayleigh_min,
)
from bubblelab.core.functionals.energy_virial import orthogonality_residual, project_kernel
from bubblelab.core.grid import PairFn, RadialFn, RadialGrid, lambda_values, norm_pair_H
from bubblelab.core.modulation import ModState
from bubblelab.core.profiles.ground_state import lambda_q_fn
from bubblelab.experiments.virial import antisymmetry, interior_agreement, seam_mismatch

K = 4


@pytest.fixture(scope="module")
def cutoff() -> CutoffP:
    return build_cutoff(0.01, 10.0)


@pytest.fixture(scope="module")
def virial_grid() -> RadialGrid:
    return RadialGrid(1e-5, 1e5, 2048)


def test_cutoff_properties(cutoff):
    assert all(p.passed for p in cutoff.properties())
    r = np.array([0.1, 1.0, 5.0, 10.0])
    assert cutoff.p(r) == pytest.approx(0.5 * r**2, rel=1e-14)
    # flat beyond Rtilde
    far = np.array([cutoff.log_Rtilde + 1.0, cutoff.log_Rtilde + 10.0])
    assert np.all(cutoff.delta(1, far) == 0.0)


def test_cutoff_seams_are_smooth(cutoff):
    mismatch = seam_mismatch(cutoff)
    assert mismatch["R"] < 1e-6
    assert mismatch["R0"] < 1e-6


@pytest.mark.parametrize("c, R", [(0.01, 10.0), (0.005, 50.0)])
def test_cutoff_properties_hold_at_default_k(c, R):
    cutoff = CutoffP(c, R)
    failed = [(p.name, p.worst, p.bound) for p in cutoff.properties() if not p.passed]
    assert failed == []
    assert build_cutoff(c, R).K == cutoff.K
    assert max(seam_mismatch(cutoff).values()) < 1e-9


def test_cutoff_tail_moments_are_consistent(cutoff):
    # D delta_n = delta_(n+1) - 2 delta_n across the truncation
    y = np.linspace(0.5, cutoff.tail_width - 0.5, 41)
    L = cutoff.log_R + cutoff.log_R0 + y
    h = 1e-4
    for n in range(4):
        derivative = (cutoff.delta(n, L + h) - cutoff.delta(n, L - h)) / (2.0 * h)
        expected = cutoff.delta(n + 1, L) - 2.0 * cutoff.delta(n, L)
        assert derivative == pytest.approx(expected, abs=1e-7)


def test_cutoff_p_prime_over_r_reaches_zero(cutoff):
    start = cutoff.log_R + cutoff.log_R0
    L = np.linspace(start, cutoff.log_Rtilde, 2001)
    g = cutoff.delta(1, L)
    assert abs(g[0]) < cutoff.c
    assert abs(g[-1]) < 1e-14
    assert np.max(np.abs(g)) <= cutoff.c


@pytest.mark.parametrize("c, R", [(0.0, 10.0), (0.5, 10.0), (0.01, 0.5)])
def test_cutoff_parameter_range(c, R):
    with pytest.raises(FatalError) as e:
        CutoffP(c, R)
    assert e.value.code == CODE_PARAMETER_RANGE


@pytest.mark.parametrize("lam", [1e-2, 1.0])
def test_a0_is_skew(cutoff, virial_grid, lam):
    op = VirialOp(lam, cutoff, virial_grid)
    assert antisymmetry(op, gaussian_battery(virial_grid, lam, n=10)) < 1e-10


def test_a0_is_scaling_generator_inside(cutoff, virial_grid):
    assert interior_agreement(VirialOp(0.1, cutoff, virial_grid), virial_grid) < 1e-5


def test_a0_on_lambda_q(cutoff, virial_grid):
    assert l0_a0_discrepancy(cutoff, virial_grid, K) < 0.05


def test_virial_operators_bounded(cutoff, virial_grid):
    op = VirialOp(1.0, cutoff, virial_grid)
    ratios = boundedness(op, gaussian_battery(virial_grid, 1.0, n=10), K)
    assert set(ratios) == {"A", "A0", "lam_dlam_A0"}
    assert all(np.isfinite(v) and v < 1e3 for v in ratios.values())


def test_functionals_vanish_at_zero(cutoff, coarse_grid, profiles, state):
    w = PairFn(RadialFn.zeros(coarse_grid), RadialFn.zeros(coarse_grid))
    f = energy_virial(state, w, K, cutoff, profiles=profiles)
    assert f.as_dict() == {name: 0.0 for name in ("E1", "V1", "H1", "E2", "V2", "H2", "E3")}


def test_functionals_need_orthogonality(cutoff, coarse_grid, profiles, state):
    lq = lambda_q_fn(coarse_grid, K, state.mu, l2=True)
    with pytest.raises(FatalError) as e:
        energy_virial(state, PairFn(lq, lq * 0.0), K, cutoff, profiles=profiles)
    assert e.value.code == CODE_INVALID_INPUT


def test_orthogonal_battery(coarse_grid, state):
    for w in orthogonal_battery(state, coarse_grid, K, n=5):
        assert orthogonality_residual(state, w, K) < 1e-10
        assert norm_pair_H(w, K) == pytest.approx(1.0)


def test_functionals_on_battery(cutoff, coarse_grid, profiles, state):
    phi = assemble(state, coarse_grid, K, profiles).phi.values
    for w in orthogonal_battery(state, coarse_grid, K, n=5):
        f = energy_virial(state, w, K, cutoff, phi=phi)
        assert f.H1 == pytest.approx(f.E1 - state.b * f.V1)
        assert f.H2 == pytest.approx(f.E2 - state.b * f.V2)
        assert f.E1 > 0.0


def test_project_kernel(coarse_grid, state):
    f = RadialFn(coarse_grid, np.exp(-coarse_grid.x**2))
    g = project_kernel(state, f, K)
    assert orthogonality_residual(state, PairFn(g, g), K) < 1e-10


def test_linearized_operator_coercive_off_kernel():
    setup = CoercivitySetup(k=K, n=200)
    constrained = rayleigh_min(setup, "L")
    free = rayleigh_min(setup, "L", constrained=False)
    assert constrained.value > 1e-3
    assert free.value < constrained.value
    assert abs(free.value) < 1e-2


def test_second_order_coercivity():
    assert rayleigh_min(CoercivitySetup(k=K, n=200), "L2").value > 1e-3


def test_unknown_operator():
    with pytest.raises(FatalError) as e:
        rayleigh_min(CoercivitySetup(k=K, n=50), "L3")
    assert e.value.code == CODE_INVALID_INPUT


def test_truncated_virial_is_scaling_inside(cutoff, virial_grid):
    lam = 0.1
    w = RadialFn(virial_grid, np.exp(-2.0 * (virial_grid.x - np.log(lam)) ** 2))
    Aw = apply_A(lam, w, cutoff)
    inside = virial_grid.r <= lam
    assert np.allclose(Aw.values[inside], lambda_values(w)[inside] / lam, rtol=0.0, atol=1e-12)


def test_pohozaev_check(cutoff, virial_grid):
    report = pohozaev_check([1e-2, 1.0], cutoff, virial_grid, K, n=5)
    assert len(report.claims) == 5
    assert report.passed, [c.name for c in report.failed_claims()]


def test_coercivity_rayleigh_report():
    report = coercivity_rayleigh("L", 100, K)
    names = [c.name for c in report.claims]
    assert names[0] == "L constrained minimum"
    assert "L kernel alignment" in names
    assert report.claims[0].passed


def test_functional_h1_matches_the_bundle(cutoff, coarse_grid, profiles, state):
    phi = assemble(state, coarse_grid, K, profiles).phi.values
    w = orthogonal_battery(state, coarse_grid, K, n=1)[0]
    assert functional_H1(state, w, K, cutoff, phi=phi) == energy_virial(state, w, K, cutoff, phi=phi).H1
