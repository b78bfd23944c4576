"""
Inversion of the linearized operator L about Q on the complement of its
kernel, by two variation-of-constants quadratures.
"""
import logging
from functools import lru_cache
from math import comb
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicSpline

from bubblelab.core.errors import CODE_SOLVABILITY_VIOLATION, error_from_code
from bubblelab.core.grid import RadialFn, inner, norm_L2
from bubblelab.core.profiles.ground_state import lambda_q_fn

logger = logging.getLogger(__name__)


@lru_cache(maxsize=8)
def smoothstep(order: int = 6) -> Polynomial:
    """S(t) on [0, 1] with S(0) = 0, S(1) = 1 and `order` vanishing derivatives at both ends."""
    n = order
    coef = np.zeros(2 * n + 2)
    for j in range(n + 1):
        coef[n + 1 + j] = comb(n + j, j) * comb(2 * n + 1, n - j) * (-1) ** j
    return Polynomial(coef)


def cutoff_le1(r: np.ndarray, order: int = 6) -> np.ndarray:
    """chi_{<=1}: 1 for r <= 1, 0 for r >= 2."""
    t = np.clip(np.asarray(r, dtype=float) - 1.0, 0.0, 1.0)
    return 1.0 - smoothstep(order)(t)


def _left_tail(integrand: np.ndarray, x0: float, p: float, log0: bool) -> float:
    if log0 and x0 != 0.0:
        return float(integrand[0] / x0 * (x0 / p - 1.0 / p**2))
    return float(integrand[0] / p)


def _cumulative(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """int_{x[0]}^{x} f by the antiderivative of the not-a-knot cubic spline of f."""
    return CubicSpline(x, f).antiderivative()(x)


def _cumulative_from_right(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """int_{x}^{x[-1]} f, accumulated from the right end so decaying tails keep their digits."""
    return _cumulative(-x[::-1], f[::-1])[::-1]


def _moment_integrals(
    integrand: np.ndarray, x: np.ndarray, exp0: Optional[float], log0: bool, exp_inf: Optional[float]
) -> Tuple[np.ndarray, np.ndarray]:
    """int_{-inf}^x and int_x^inf of integrand ~ r^exp0 (r^exp_inf) beyond the grid ends."""
    left = _cumulative(x, integrand)
    if exp0 is not None:
        left = left + _left_tail(integrand, x[0], exp0, log0)
    right = _cumulative_from_right(x, integrand)
    if exp_inf is not None and exp_inf < 0:
        right = right - integrand[-1] / exp_inf
    return left, right


def solve_linearized(F: RadialFn, k: int, tol: float = 1e-8) -> RadialFn:
    """
    Solve L phi = F with <phi | Lambda Q> = 0.

    With g = Lambda Q spanning the kernel, phi = g v and
    (r g^2 v')' = -r g F. The inner integral is taken from the origin for
    r <= 1 and from infinity beyond, the outer one is split with chi_{<=1}
    so that both pieces converge. The two inner integrals agree once the
    quadrature's own <F | g> is removed from F, which is far below tol.
    """
    grid = F.grid
    x, r = grid.x, grid.r
    g_fn = lambda_q_fn(grid, k)
    g = g_fn.values

    norm_scale = norm_L2(F) * norm_L2(g_fn)
    defect = inner(F, g_fn)
    if abs(defect) > tol * norm_scale:
        raise error_from_code(
            CODE_SOLVABILITY_VIOLATION,
            f"source is not orthogonal to Lambda Q: <F|Lambda Q> = {defect:.3e} "
            f"(scale {norm_scale:.3e})",
        )

    f_exp0 = None if F.exp0 is None else F.exp0 + k + 2.0
    f_exp_inf = None if F.exp_inf is None else F.exp_inf - k + 2.0
    left, right = _moment_integrals(F.values * g * r**2, x, f_exp0, F.log0, f_exp_inf)
    g_left, g_right = _moment_integrals(g * g * r**2, x, 2.0 * k + 2.0, False, 2.0 - 2.0 * k)
    c = (left[-1] + right[-1]) / (g_left[-1] + g_right[-1])
    left, right = left - c * g_left, right - c * g_right
    logger.debug(f"solve_linearized: quadrature kernel component {c:.3e} removed")

    chi = cutoff_le1(r)
    inner_int = chi * left - (1.0 - chi) * right
    H = inner_int / g**2

    outer_right = _cumulative_from_right(x, chi * H)
    outer_left = _cumulative(x, (1.0 - chi) * H)
    v = outer_right - outer_left

    # v ~ const + r^(p+2-k) at the origin, a logarithm when p + 2 = k
    p0 = float(k) if F.exp0 is None else F.exp0
    phi = RadialFn(grid, g * v, min(float(k), p0 + 2.0), bool(abs(p0 + 2.0 - k) < 1e-12),
                   float(-k + 2))
    return project_out_kernel(phi, k)


def project_out_kernel(phi: RadialFn, k: int) -> RadialFn:
    g_fn = lambda_q_fn(phi.grid, k)
    coef = inner(phi, g_fn) / inner(g_fn, g_fn)
    return phi.with_values(phi.values - coef * g_fn.values)
