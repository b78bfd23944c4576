"""Ground state Q(r) = 2 arctan(r^k), its scaling derivatives and constants."""
import math
from dataclasses import dataclass

import numpy as np
from mpmath import mp

from bubblelab.core.grid import EquivClass, RadialFn, RadialGrid
from bubblelab.core.operators import sech


def _kx(k: int, r) -> np.ndarray:
    return k * np.log(np.asarray(r, dtype=float))


def ground_state(k: int, r) -> np.ndarray:
    return 2.0 * np.arctan(np.exp(_kx(k, r)))


def ground_state_complement(k: int, r) -> np.ndarray:
    """pi - Q, accurate where Q is close to pi."""
    return 2.0 * np.arctan(np.exp(-_kx(k, r)))


def sin_q(k: int, r) -> np.ndarray:
    return sech(_kx(k, r))


def cos_q(k: int, r) -> np.ndarray:
    return -np.tanh(_kx(k, r))


def lambda_q(k: int, r) -> np.ndarray:
    """Lambda Q = r Q' = 2k r^k / (1 + r^2k) = k sin Q."""
    return k * sech(_kx(k, r))


def lambda_lambda_q(k: int, r) -> np.ndarray:
    y = _kx(k, r)
    return -k**2 * sech(y) * np.tanh(y)


def lambda0_lambda_q(k: int, r) -> np.ndarray:
    """(1 + r d/dr) Lambda Q."""
    return lambda_q(k, r) + lambda_lambda_q(k, r)


def nonlinearity(k: int, u) -> np.ndarray:
    """f(u) = k^2 sin(2u) / 2."""
    return 0.5 * k**2 * np.sin(2.0 * np.asarray(u))


def lambda_q_fn(grid: RadialGrid, k: int, lam: float = 1.0, l2: bool = False) -> RadialFn:
    """Lambda Q_lam on a grid; with l2 the L2-scaled lam^-1 Lambda Q(r/lam)."""
    vals = lambda_q(k, grid.r / lam)
    if l2:
        vals = vals / lam
    return RadialFn(grid, vals, float(k), False, float(-k))


def lambda0_lambda_q_fn(grid: RadialGrid, k: int, lam: float = 1.0, l2: bool = False) -> RadialFn:
    vals = lambda0_lambda_q(k, grid.r / lam)
    if l2:
        vals = vals / lam
    return RadialFn(grid, vals, float(k), False, float(-k))


def ground_state_fn(grid: RadialGrid, k: int, lam: float = 1.0) -> RadialFn:
    return RadialFn(grid, ground_state(k, grid.r / lam), float(k), False, 0.0)


@dataclass(frozen=True)
class Constants:
    """Structural constants; lamQ_L2sq is ||Lambda Q||^2 in the r dr convention."""
    k: int
    rho_k: float
    gamma_k: float
    q_k: float
    lamQ_L2sq: float

    @property
    def kappa(self) -> float:
        return self.lamQ_L2sq

    @property
    def energy_q(self) -> float:
        """E(Q) = 4 pi k (energy convention, with 2 pi)."""
        return 4.0 * math.pi * self.k


def constants(k: int) -> Constants:
    EquivClass(k)
    rho_sq = 8.0 * k / math.pi * math.sin(math.pi / k)
    rho = math.sqrt(rho_sq)
    gamma = 0.5 * k * rho_sq
    q = ((k - 2) * rho / 2.0) ** (-2.0 / (k - 2))
    lamq_sq = 2.0 * math.pi / math.sin(math.pi / k)
    return Constants(k=k, rho_k=rho, gamma_k=gamma, q_k=q, lamQ_L2sq=lamq_sq)


def constants_oracle(k: int, dps: int = 40) -> dict:
    """The same closed forms evaluated in extended precision."""
    EquivClass(k)
    with mp.workdps(dps):
        rho_sq = 8 * mp.mpf(k) / mp.pi * mp.sin(mp.pi / k)
        rho = mp.sqrt(rho_sq)
        gamma = mp.mpf(k) / 2 * rho_sq
        q = ((k - 2) * rho / 2) ** (-mp.mpf(2) / (k - 2))
        lamq_sq = 2 * mp.pi / mp.sin(mp.pi / k)
        return {
            "rho_k": rho,
            "gamma_k": gamma,
            "q_k": q,
            "lamQ_L2sq": lamq_sq,
        }


def cubic_moment_oracle(k: int, sign: int = 1, dps: int = 30):
    """int_0^inf (Lambda Q)^3 r^{sign*k - 1} dr by mpmath quadrature (both equal 2k^2)."""
    with mp.workdps(dps):
        def integrand(r):
            lq = 2 * k * r**k / (1 + r ** (2 * k))
            return lq**3 * r ** (sign * k - 1)

        return mp.quad(integrand, [0, 1, mp.inf])
