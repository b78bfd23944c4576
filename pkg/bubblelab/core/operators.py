"""Linear differential operators of the radial reduction."""
from typing import Tuple, Union

import numpy as np

from bubblelab.core.grid import RadialFn, RadialGrid, _add_exp, lambda_values


def sech(y: np.ndarray) -> np.ndarray:
    """Overflow-free 1/cosh."""
    e = np.exp(-np.abs(y))
    return 2.0 * e / (1.0 + e * e)


def _log_scaled(grid: RadialGrid, lam: float) -> np.ndarray:
    return grid.x - np.log(lam)


def potential_P(grid: RadialGrid, lam: float, k: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    P_lam = lam^-2 P(r/lam) with P = r^-2 (f'(Q) - k^2) = -2 k^2 sin^2 Q / r^2,
    together with its r-derivative and radial Laplacian.
    """
    y = _log_scaled(grid, lam)
    s = sech(k * y)
    c = -np.tanh(k * y)
    r = grid.r
    p_hat = -2.0 * k**2 * s**2
    p_hat_x = -4.0 * k**3 * s**2 * c
    p_hat_xx = -4.0 * k**4 * (2.0 * s**2 * c**2 - s**4)
    P = p_hat / r**2
    dP = (p_hat_x - 2.0 * p_hat) / r**3
    lapP = (p_hat_xx - 4.0 * p_hat_x + 4.0 * p_hat) / r**4
    return P, dP, lapP


def _second_x(f: RadialFn) -> np.ndarray:
    return f.grid.d2(f.values, f.exp0, f.log0, f.exp_inf)


def d_rr_values(f: RadialFn) -> np.ndarray:
    """Second r-derivative (f_xx - f_x) / r^2."""
    return (_second_x(f) - lambda_values(f)) / f.grid.r**2


def laplacian(f: RadialFn) -> RadialFn:
    """Radial Laplacian f_rr + f_r / r = f_xx / r^2."""
    return RadialFn(
        f.grid, _second_x(f) / f.grid.r**2,
        _add_exp(f.exp0, -2.0), f.log0, _add_exp(f.exp_inf, -2.0),
    )


def apply_L0(f: RadialFn, k: int) -> RadialFn:
    """L0 w = -Delta w + k^2 w / r^2."""
    vals = -(_second_x(f) - k**2 * f.values) / f.grid.r**2
    return RadialFn(f.grid, vals, _add_exp(f.exp0, -2.0), f.log0, _add_exp(f.exp_inf, -2.0))


def apply_LU(U: Union[RadialFn, np.ndarray], f: RadialFn, k: int) -> RadialFn:
    """L_U w = -Delta w + k^2 cos(2U) w / r^2."""
    u = U.values if isinstance(U, RadialFn) else np.asarray(U)
    vals = -(_second_x(f) - k**2 * np.cos(2.0 * u) * f.values) / f.grid.r**2
    return RadialFn(f.grid, vals, _add_exp(f.exp0, -2.0), f.log0, _add_exp(f.exp_inf, -2.0))


def apply_LPhi(phi: Union[RadialFn, np.ndarray], f: RadialFn, k: int) -> RadialFn:
    return apply_LU(phi, f, k)


def apply_Llam(lam: float, f: RadialFn, k: int) -> RadialFn:
    """L_lam = L0 + P_lam, the linearization about Q_lam."""
    P, _, _ = potential_P(f.grid, lam, k)
    L0f = apply_L0(f, k)
    return L0f.with_values(L0f.values + P * f.values)


def apply_K(lam: float, f: RadialFn, k: int) -> RadialFn:
    """K w = 2 P L0 w - 2 P' w' + (P^2 - Delta P) w, so that L^2 = L0^2 + K."""
    P, dP, lapP = potential_P(f.grid, lam, k)
    L0f = apply_L0(f, k)
    fr = lambda_values(f) / f.grid.r
    vals = 2.0 * P * L0f.values - 2.0 * dP * fr + (P**2 - lapP) * f.values
    return L0f.with_values(vals)


def apply_L2(lam: float, f: RadialFn, k: int) -> RadialFn:
    return apply_Llam(lam, apply_Llam(lam, f, k), k)


def _weighted(f: RadialFn, dens: np.ndarray, shift: float) -> float:
    exp0 = None if f.exp0 is None else 2 * f.exp0 + shift
    exp_inf = None if f.exp_inf is None else 2 * f.exp_inf + shift
    return f.grid.integrate(dens, exp0, f.log0, exp_inf)


def l0_square_terms(f: RadialFn, k: int) -> float:
    """
    Right side of ||L0 f||^2 = int f_rr^2 + (2k^2+1) int f_r^2/r^2
    + (k^4 - 4k^2) int f^2/r^4, all against r dr.
    """
    r = f.grid.r
    fr = lambda_values(f) / r
    frr = d_rr_values(f)
    return (
        _weighted(f, frr**2, -4.0)
        + (2 * k**2 + 1) * _weighted(f, fr**2 / r**2, -4.0)
        + (k**4 - 4 * k**2) * _weighted(f, f.values**2 / r**4, -4.0)
    )


def l_square_terms(f: RadialFn, k: int, lam: float = 1.0) -> float:
    """
    Right side of the expansion of <L^2 f | f> into the free part plus the
    h1 (f_r^2 / r^2) and potential (f^2 / r^4) corrections, with
    h1 = 2 r^2 P.
    """
    r = f.grid.r
    y = _log_scaled(f.grid, lam)
    s = sech(k * y)
    c = -np.tanh(k * y)
    fr = lambda_values(f) / r
    frr = d_rr_values(f)
    h1 = -4.0 * k**2 * s**2
    h2 = -8.0 * k**4 * s**4 - 16.0 * k**3 * s**2
    pot = k**4 - 4 * k**2 + (4 * k**4 + 16 * k**3 * (1.0 - c) + 8 * k**2) * s**2
    return (
        _weighted(f, frr**2, -4.0)
        + (2 * k**2 + 1) * _weighted(f, fr**2 / r**2, -4.0)
        + _weighted(f, (pot + h2) * f.values**2 / r**4, -4.0)
        + _weighted(f, h1 * fr**2 / r**2, -4.0)
    )
