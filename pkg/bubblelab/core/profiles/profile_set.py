import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Dict, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from bubblelab.core.grid import EquivClass, RadialFn, RadialGrid
from bubblelab.core.profiles.ground_state import constants, lambda0_lambda_q, lambda_q
from bubblelab.core.profiles.linearized import solve_linearized
from bubblelab.core.report import write_columns

logger = logging.getLogger(__name__)

CANONICAL_GRID = RadialGrid(1e-7, 1e7, 32769)

FIELDS = ("X", "LX", "L0X", "L0LX")


@dataclass(frozen=True, eq=False)
class Profile:
    """
    A correction profile tabulated on the canonical grid, evaluated
    anywhere by a cubic spline in log r and power-law extrapolation.

    Fields: X itself, LX = Lambda X, L0X = Lambda_0 X, L0LX = Lambda_0 Lambda X.
    """
    name: str
    solution: RadialFn

    @property
    def grid(self) -> RadialGrid:
        return self.solution.grid

    @property
    def exp0(self) -> float:
        return self.solution.exp0

    @property
    def log0(self) -> bool:
        return self.solution.log0

    @property
    def exp_inf(self) -> float:
        return self.solution.exp_inf

    @cached_property
    def tables(self) -> Dict[str, np.ndarray]:
        s = self.solution
        lx = self.grid.d1(s.values, s.exp0, s.log0, s.exp_inf)
        l0lx = lx + self.grid.d1(lx, s.exp0, s.log0, s.exp_inf)
        return {"X": s.values, "LX": lx, "L0X": s.values + lx, "L0LX": l0lx}

    @cached_property
    def splines(self) -> Dict[str, CubicSpline]:
        return {name: CubicSpline(self.grid.x, vals) for name, vals in self.tables.items()}

    def evaluate(self, r: np.ndarray, which: str = "X") -> np.ndarray:
        x = np.log(np.asarray(r, dtype=float))
        table = self.tables[which]
        gx = self.grid.x
        out = np.empty_like(x)
        inside = (x >= gx[0]) & (x <= gx[-1])
        out[inside] = self.splines[which](x[inside])
        lo = x < gx[0]
        if np.any(lo):
            ext = table[0] * np.exp(self.exp0 * (x[lo] - gx[0]))
            if self.log0:
                ext = ext * x[lo] / gx[0]
            out[lo] = ext
        hi = x > gx[-1]
        if np.any(hi):
            out[hi] = table[-1] * np.exp(self.exp_inf * (x[hi] - gx[-1]))
        return out

    def on(self, grid: RadialGrid, scale: float = 1.0, which: str = "X", l2: bool = False) -> RadialFn:
        """X_scale(r) = X(r/scale); with l2 the L2 scaling scale^-1 X(r/scale)."""
        vals = self.evaluate(grid.r / scale, which)
        if l2:
            vals = vals / scale
        return RadialFn(grid, vals, self.exp0, self.log0, self.exp_inf)


@dataclass(frozen=True, eq=False)
class ProfileSet:
    k: int
    A: Profile
    B: Profile
    Btilde: Profile

    def export_csv(self, path: Path, grid: Optional[RadialGrid] = None) -> Path:
        grid = grid or RadialGrid()
        return write_columns(path, {
            "r": grid.r,
            "A": self.A.evaluate(grid.r),
            "B": self.B.evaluate(grid.r),
            "Btilde": self.Btilde.evaluate(grid.r),
        })


def source_values(name: str, k: int, r: np.ndarray, gamma: Optional[float] = None) -> np.ndarray:
    """Right-hand side F of L X = F for X in {A, B, Btilde}, pointwise in r."""
    lq = lambda_q(k, r)
    if name == "A":
        return -lambda0_lambda_q(k, r)
    gamma = constants(k).gamma_k if gamma is None else gamma
    if name == "B":
        return gamma * lq - 4.0 * r ** (k - 2) * lq**2
    if name == "Btilde":
        return -gamma * lq + 4.0 * r ** (-k - 2.0) * lq**2
    raise KeyError(name)


def source_A(grid: RadialGrid, k: int) -> RadialFn:
    """-Lambda_0 Lambda Q."""
    return RadialFn(grid, source_values("A", k, grid.r), float(k), False, float(-k))


def source_B(grid: RadialGrid, k: int, gamma: Optional[float] = None) -> RadialFn:
    """gamma_k Lambda Q - 4 r^(k-2) (Lambda Q)^2."""
    return RadialFn(grid, source_values("B", k, grid.r, gamma), float(k), False, float(-k))


def source_Btilde(grid: RadialGrid, k: int, gamma: Optional[float] = None) -> RadialFn:
    """-gamma_k Lambda Q + 4 r^(-k-2) (Lambda Q)^2."""
    return RadialFn(grid, source_values("Btilde", k, grid.r, gamma), float(k - 2), False, float(-k))


@lru_cache(maxsize=8)
def build_profile_set(k: int, tol: float = 1e-8) -> ProfileSet:
    EquivClass(k)
    grid = CANONICAL_GRID
    logger.info(f"Building profiles A, B, Btilde for k={k} on {grid.n} nodes")
    A = solve_linearized(source_A(grid, k), k, tol)
    B = solve_linearized(source_B(grid, k), k, tol)
    Bt = solve_linearized(source_Btilde(grid, k), k, tol)
    return ProfileSet(k=k, A=Profile("A", A), B=Profile("B", B), Btilde=Profile("Btilde", Bt))
