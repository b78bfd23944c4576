import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bubblelab.core.errors import (
    CODE_GRID_MISMATCH,
    CODE_INVALID_INPUT,
    CODE_UNSUPPORTED_EQUIVARIANCE,
    FatalError,
)
from bubblelab.core.grid import (
    EquivClass,
    PairFn,
    RadialFn,
    RadialGrid,
    apply_Lambda,
    inner,
    lambda_values,
    norm_H,
    norm_H2,
    norm_L2,
    norm_pair_H,
)
from bubblelab.core.operators import apply_L0, apply_L2, apply_Llam, l0_square_terms, l_square_terms
from bubblelab.core.profiles.ground_state import constants, lambda_q_fn


def bump(grid: RadialGrid, x0: float, s: float) -> RadialFn:
    return RadialFn(grid, np.exp(-0.5 * ((grid.x - x0) / s) ** 2))


def test_gaussian_integral(grid):
    # int_0^inf exp(-r^2) r dr = 1/2
    assert grid.integrate(np.exp(-grid.r**2), exp0=0.0) == pytest.approx(0.5, rel=1e-10)


def test_power_tail_at_infinity():
    grid = RadialGrid(1e-3, 1e2, 2048)
    # int_0^inf r^4 / (1 + r^2)^4 r dr = 1/6, with an r^-4 tail beyond r_max
    vals = grid.r**4 / (1.0 + grid.r**2) ** 4
    assert grid.integrate(vals, exp0=4.0, exp_inf=-4.0) == pytest.approx(1.0 / 6.0, rel=1e-6)


def test_lambda_of_power_law(grid):
    f = RadialFn(grid, grid.r**3 * np.exp(-grid.r), 3.0, False, None)
    expected = (3.0 - grid.r) * f.values
    inside = (grid.r > 1e-5) & (grid.r < 50.0)
    assert np.max(np.abs(lambda_values(f) - expected)[inside]) < 1e-6


def test_lambda_q_norm(grid, k):
    lq = lambda_q_fn(grid, k)
    kappa = constants(k).kappa
    assert norm_L2(lq) ** 2 == pytest.approx(kappa, rel=1e-8)


def test_grid_mismatch():
    a = RadialGrid(1e-3, 1e3, 64)
    b = RadialGrid(1e-3, 1e3, 128)
    with pytest.raises(FatalError) as e:
        inner(RadialFn.zeros(a), RadialFn.zeros(b))
    assert e.value.code == CODE_GRID_MISMATCH


def test_non_finite_samples_rejected(coarse_grid):
    vals = np.zeros(coarse_grid.n)
    vals[3] = np.nan
    with pytest.raises(FatalError) as e:
        RadialFn(coarse_grid, vals)
    assert e.value.code == CODE_INVALID_INPUT


@pytest.mark.parametrize("k", [1, 2, 3, 4.5])
def test_unsupported_equivariance(k):
    with pytest.raises(FatalError) as e:
        EquivClass(k)
    assert e.value.code == CODE_UNSUPPORTED_EQUIVARIANCE


@settings(max_examples=25, deadline=None)
@given(x0=st.floats(-4.0, 4.0), s=st.floats(0.5, 1.5), k=st.integers(4, 8))
def test_integration_by_parts(x0, s, k):
    grid = RadialGrid(1e-5, 1e5, 2048)
    f = bump(grid, x0, s)
    assert inner(apply_L0(f, k), f) == pytest.approx(norm_H(f, k) ** 2, rel=1e-6)


@settings(max_examples=25, deadline=None)
@given(x0=st.floats(-3.0, 3.0), x1=st.floats(-3.0, 3.0), lam=st.floats(0.1, 10.0))
def test_linearized_operator_is_symmetric(x0, x1, lam):
    grid = RadialGrid(1e-5, 1e5, 2048)
    f, g = bump(grid, x0, 0.7), bump(grid, x1, 0.9)
    k = 4
    lhs = inner(apply_Llam(lam, f, k), g)
    rhs = inner(f, apply_Llam(lam, g, k))
    assert lhs == pytest.approx(rhs, rel=1e-6, abs=1e-10)


def test_l0_square_expansion(k):
    grid = RadialGrid(1e-5, 1e5, 2048)
    f = bump(grid, 0.3, 0.8)
    assert norm_L2(apply_L0(f, k)) ** 2 == pytest.approx(l0_square_terms(f, k), rel=1e-6)
    assert norm_H2(f, k) == pytest.approx(norm_L2(apply_L0(f, k)))


@settings(max_examples=15, deadline=None)
@given(x0=st.floats(-2.0, 2.0), lam=st.floats(0.2, 5.0), k=st.integers(4, 6))
def test_l_square_expansion(x0, lam, k):
    grid = RadialGrid(1e-5, 1e5, 2048)
    f = bump(grid, x0, 0.8)
    expanded = l_square_terms(f, k, lam)
    assert norm_L2(apply_Llam(lam, f, k)) ** 2 == pytest.approx(expanded, rel=1e-5)
    assert inner(apply_L2(lam, f, k), f) == pytest.approx(expanded, rel=1e-5)


def test_radial_fn_algebra_tracks_exponents(grid):
    f = RadialFn(grid, grid.r**4 / (1.0 + grid.r**8), 4.0, False, -4.0)
    g = f.times_power(-2.0)
    assert (g.exp0, g.exp_inf) == (2.0, -6.0)
    h = f + g
    assert (h.exp0, h.exp_inf) == (2.0, -4.0)
    assert np.allclose((f * 2.0).values, 2.0 * f.values)


def test_pair_norm(coarse_grid, k):
    f = bump(coarse_grid, 0.0, 0.5)
    w = PairFn(f, f * 3.0)
    assert norm_pair_H(w, k) == pytest.approx(np.hypot(norm_H(f, k), 3.0 * norm_L2(f)))
    assert norm_H(apply_Lambda(f), k) > 0.0
