"""
Truncated virial operators

    A(lam) w  = p'(r/lam) d_r w                         = lam^-1 delta_1 Lambda w
    A0(lam) w = (p''(r/lam)/(2 lam) + p'(r/lam)/(2r)) w + A(lam) w
              = lam^-1 (delta_2 w / 2 + delta_1 Lambda w)

with delta_n evaluated at r/lam, and the checks built on them.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence

import numpy as np

from bubblelab.core.functionals.cutoff import CutoffP
from bubblelab.core.grid import RadialFn, RadialGrid, inner, lambda_values, norm_H, norm_H2, norm_L2
from bubblelab.core.operators import apply_K, apply_L0, potential_P
from bubblelab.core.profiles.ground_state import lambda0_lambda_q, lambda_lambda_q, lambda_q
from bubblelab.core.report import Convention, Provenance, Report

logger = logging.getLogger(__name__)

C0 = 0.05
MARGIN = 0.1


def _skew_d1(values: np.ndarray, h: float) -> np.ndarray:
    """Centered fourth-order d/dx with zero padding; antisymmetric under the plain sum."""
    ext = np.concatenate([np.zeros(2), values, np.zeros(2)])
    return (ext[:-4] - 8.0 * ext[1:-3] + 8.0 * ext[3:-1] - ext[4:]) / (12.0 * h)


@dataclass(frozen=True, eq=False)
class VirialOp:
    lam: float
    cutoff: CutoffP
    grid: RadialGrid

    @cached_property
    def moments(self) -> np.ndarray:
        return self.cutoff.deltas(self.grid.x - np.log(self.lam))

    def _result(self, w: RadialFn, values: np.ndarray) -> RadialFn:
        # zero beyond the plateau radius, so no tail at infinity
        return RadialFn(self.grid, values, w.exp0, w.log0, None)

    def apply_A(self, w: RadialFn) -> RadialFn:
        self.grid.check_same(w.grid)
        return self._result(w, self.moments[1] * lambda_values(w) / self.lam)

    def apply_A0(self, w: RadialFn) -> RadialFn:
        """
        Written as (delta_1 d_x F + d_x(delta_1 F)) / (2 lam r) with F = r w,
        so that <A0 h | h> vanishes on the grid up to the end weights.
        """
        self.grid.check_same(w.grid)
        d1 = self.moments[1]
        F = self.grid.r * w.values
        h = self.grid.dx
        G = 0.5 * (d1 * _skew_d1(F, h) + _skew_d1(d1 * F, h))
        return self._result(w, G / (self.lam * self.grid.r))

    def apply_A0_closed(self, w: np.ndarray, lambda_w: np.ndarray) -> np.ndarray:
        """A0 w from samples of w and Lambda w known in closed form."""
        d = self.moments
        return (0.5 * d[2] * w + d[1] * lambda_w) / self.lam

    def apply_lam_dlam_A0(self, w: RadialFn) -> RadialFn:
        """lam d/dlam of A0(lam), applied to w."""
        d = self.moments
        lw = lambda_values(w)
        extra = (0.5 * (d[3] - 2.0 * d[2]) * w.values + (d[2] - 2.0 * d[1]) * lw) / self.lam
        return self._result(w, -self.apply_A0(w).values - extra)


def apply_A(lam: float, w: RadialFn, cutoff: CutoffP) -> RadialFn:
    return VirialOp(lam, cutoff, w.grid).apply_A(w)


def apply_A0(lam: float, w: RadialFn, cutoff: CutoffP) -> RadialFn:
    return VirialOp(lam, cutoff, w.grid).apply_A0(w)


def gaussian_battery(grid: RadialGrid, lam: float, n: int = 30, seed: int = 0) -> List[RadialFn]:
    """
    Bumps exp(-(x - x0)^2 / 2 s^2) in x = log r around scale lam, normalized
    in H for k = 1. Same seed gives the same shapes at every lam.
    """
    rng = np.random.default_rng(seed)
    offsets = rng.uniform(-3.0, 3.0, n)
    widths = rng.uniform(0.3, 1.5, n)
    out = []
    for x0, s in zip(offsets + np.log(lam), widths):
        w = RadialFn(grid, np.exp(-0.5 * ((grid.x - x0) / s) ** 2))
        out.append(w / norm_H(w, 1))
    return out


def _inside(grid: RadialGrid, radius: float) -> np.ndarray:
    return (grid.r <= radius).astype(float)


@dataclass(frozen=True)
class PohozaevMeasure:
    """Smallest c0 for which each inequality holds on w."""
    first: float
    second: float


def pohozaev_constants(op: VirialOp, w: RadialFn, k: int) -> PohozaevMeasure:
    """
    Both virial lower bounds

        <A0 w | L0 w>   >= -c0/lam ||w||_H^2   + 1/lam int_0^{R lam} (w_r^2 + k^2 w^2 / r^2) r dr
        <A0 w | L0^2 w> >= -c0/lam ||w||_H2^2  + 2/lam int_0^{R lam} (L0 w)^2 r dr

    solved for c0.
    """
    grid, lam = op.grid, op.lam
    inside = _inside(grid, op.cutoff.R * lam)
    A0w = op.apply_A0(w)
    L0w = apply_L0(w, k)
    L0L0w = apply_L0(L0w, k)

    wx = lambda_values(w)
    dens = inside * (wx**2 + k**2 * w.values**2) / grid.r**2
    interior1 = grid.integrate(dens)
    lhs1 = inner(A0w, L0w)
    first = max(0.0, interior1 - lam * lhs1) / norm_H(w, k) ** 2

    interior2 = 2.0 * grid.integrate(inside * L0w.values**2)
    lhs2 = inner(A0w, L0L0w)
    second = max(0.0, interior2 - lam * lhs2) / norm_H2(w, k) ** 2
    return PohozaevMeasure(first, second)


def pohozaev_check(
    lams: Sequence[float],
    cutoff: CutoffP,
    grid: RadialGrid,
    k: int,
    n: int = 30,
    seed: int = 0,
    c0: float = C0,
    margin: float = MARGIN,
    report: Optional[Report] = None,
) -> Report:
    """Both virial lower bounds over a bump battery at each scale, with 10% margin on c0."""
    report = report or Report(experiment_id="pohozaev")
    bound = (1.0 - margin) * c0
    per_lam: Dict[float, float] = {}
    for lam in lams:
        op = VirialOp(lam, cutoff, grid)
        measures = [pohozaev_constants(op, w, k) for w in gaussian_battery(grid, lam, n, seed)]
        first = max(m.first for m in measures)
        second = max(m.second for m in measures)
        per_lam[lam] = max(first, second)
        report.check_below(
            f"pohozaev c0 lam={lam:g} R={cutoff.R:g}", first, bound, provenance=Provenance.LITERATURE,
            anchor="virial pohozaev inequality", convention=Convention.RDR, n_functions=n,
        )
        report.check_below(
            f"pohozaev second order c0 lam={lam:g} R={cutoff.R:g}", second, bound,
            provenance=Provenance.LITERATURE, anchor="virial pohozaev inequality, second order",
            convention=Convention.RDR, n_functions=n,
        )
    values = np.array(list(per_lam.values()))
    report.check_below(
        f"pohozaev c0 spread over lam R={cutoff.R:g}", float(np.ptp(values)), 0.1 * c0,
        provenance=Provenance.DERIVED, anchor="virial pohozaev inequality", gated=False,
    )
    return report


def l0_a0_discrepancy(cutoff: CutoffP, grid: RadialGrid, k: int, lam: float = 1.0) -> float:
    """
    ||Lambda0 Lambda Q_lam (L2-scaled) - A0(lam) Lambda Q_lam||_L2 from closed
    forms; zero where p is quadratic, so only r > R lam contributes.
    """
    rho = grid.r / lam
    op = VirialOp(lam, cutoff, grid)
    target = lambda0_lambda_q(k, rho) / lam
    a0 = op.apply_A0_closed(lambda_q(k, rho), lambda_lambda_q(k, rho))
    diff = RadialFn(grid, target - a0, None, False, float(-k))
    return norm_L2(diff)


def replacement_errors(op: VirialOp, w: RadialFn, k: int) -> Dict[str, float]:
    """
    lam |<A0 w | P_lam w> - <lam^-1 Lambda0 w | P_lam w>| / ||w||_H^2 and the
    analogue with K_lam over ||w||_H2^2.
    """
    lam = op.lam
    P, _, _ = potential_P(op.grid, lam, k)
    A0w = op.apply_A0(w).values
    L0w = (w.values + lambda_values(w)) / lam
    Pw = P * w.values
    first = lam * abs(op.grid.integrate((A0w - L0w) * Pw)) / norm_H(w, k) ** 2
    Kw = apply_K(lam, w, k).values
    second = lam * abs(op.grid.integrate((A0w - L0w) * Kw)) / norm_H2(w, k) ** 2
    return {"potential": float(first), "square": float(second)}


def boundedness(op: VirialOp, ws: Sequence[RadialFn], k: int) -> Dict[str, float]:
    """Largest ||T w||_L2 / ||w||_H over the battery for T = A, A0, lam d_lam A0."""
    ratios = {"A": 0.0, "A0": 0.0, "lam_dlam_A0": 0.0}
    for w in ws:
        h = norm_H(w, k)
        ratios["A"] = max(ratios["A"], norm_L2(op.apply_A(w)) / h)
        ratios["A0"] = max(ratios["A0"], norm_L2(op.apply_A0(w)) / h)
        ratios["lam_dlam_A0"] = max(ratios["lam_dlam_A0"], norm_L2(op.apply_lam_dlam_A0(w)) / h)
    return ratios
