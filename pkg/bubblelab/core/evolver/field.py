"""
Method-of-lines form of u_tt = u_rr + u_r / r - k^2 sin(2u) / (2 r^2) on the
log grid: u_tt = M u + c + N(u) with M = (D_xx - k^2) / r^2 the free part and
N(u) = -k^2 (sin(2u)/2 - u) / r^2 the nonlinear remainder.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from bubblelab.core.evolver.models import FieldState
from bubblelab.core.grid import RadialFn, RadialGrid

logger = logging.getLogger(__name__)

D2_STENCIL = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


@dataclass(frozen=True, eq=False)
class WaveOperator:
    """
    The discretized right side. Below the first node u is continued with
    u / r^k constant, which keeps the r^k class at the origin; the last node is
    held at u_inf, which also fills the ghost beyond it.
    """
    grid: RadialGrid
    k: int
    u_inf: float = 0.0

    @cached_property
    def matrix(self) -> sparse.csr_matrix:
        n, h, k = self.grid.n, self.grid.dx, self.k
        diags = [np.full(n - abs(o), w) for o, w in zip(range(-2, 3), D2_STENCIL)]
        D2 = sparse.diags(diags, [-2, -1, 0, 1, 2], shape=(n, n), format="lil")
        decay = math.exp(-k * h)
        D2[0, 0] += D2_STENCIL[0] * decay**2 + D2_STENCIL[1] * decay
        D2[1, 0] += D2_STENCIL[0] * decay
        D2 = D2 / h**2 - k**2 * sparse.identity(n)
        M = sparse.diags(1.0 / self.grid.r**2) @ sparse.csr_matrix(D2)
        M = sparse.lil_matrix(M)
        M[n - 1, :] = 0.0
        return sparse.csr_matrix(M)

    @cached_property
    def affine(self) -> np.ndarray:
        c = np.zeros(self.grid.n)
        c[-2] = D2_STENCIL[4] * self.u_inf / (self.grid.dx**2 * self.grid.r[-2] ** 2)
        return c

    def linear(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ u + self.affine

    def nonlinear(self, u: np.ndarray) -> np.ndarray:
        out = -self.k**2 * (0.5 * np.sin(2.0 * u) - u) / self.grid.r**2
        out[-1] = 0.0
        return out

    def acceleration(self, u: np.ndarray) -> np.ndarray:
        return self.linear(u) + self.nonlinear(u)

    def energy(self, u: np.ndarray, ut: np.ndarray) -> float:
        """pi int (u_t^2 r^2 + u_x^2 + k^2 sin^2 u) dx, the 2 pi energy convention."""
        ux = self.grid.d1(u, float(self.k), False, None)
        dens = ut**2 * self.grid.r**2 + ux**2 + self.k**2 * np.sin(u) ** 2
        return math.pi * self.grid.integrate_dx(dens)

    def stable_step(self) -> float:
        """2 / omega_max for the explicit scheme, from the innermost node."""
        r0, h = self.grid.r[0], self.grid.dx
        omega_sq = (16.0 / 3.0) / (r0**2 * h**2) + self.k**2 / r0**2
        return 2.0 / math.sqrt(omega_sq)


def operator_for(state: FieldState, k: int) -> WaveOperator:
    return WaveOperator(state.grid, k, float(state.u.values[-1]))


def rhs_field(state: FieldState, k: int) -> RadialFn:
    """u_rr + u_r / r - k^2 sin(2u) / (2 r^2) on the grid."""
    op = operator_for(state, k)
    return RadialFn(state.grid, op.acceleration(state.u.values), float(k - 2), False, None)


def energy(state: FieldState, k: int) -> float:
    return operator_for(state, k).energy(state.u.values, state.ut.values)
