"""
The virial cutoff p: p = r^2/2 for r <= R, a log-corrected quadratic up to
R0 = R e^(2/c1), then p'/r is smoothly cut off over tail_width e-folds of r
so that p is constant beyond Rtilde = R0 e^tail_width.

R0 is far outside double range for useful c, so p is never sampled
directly. Everything is expressed through the dimensionless moments

    delta_n(r) = r^-2 D^n p(r),    D = r d/dr,

which stay O(1) everywhere; the cutoff properties are polynomial
combinations of them.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from bubblelab.core.errors import CODE_PARAMETER_RANGE, error_from_code
from bubblelab.core.profiles.linearized import smoothstep

logger = logging.getLogger(__name__)

N_MOMENTS = 7
SWEEP_POINTS = 10_000

# D-polynomials of the nine properties: each is sum_n coef[n] delta_n
DRDR_P = Polynomial([0.0, -1.0, 1.0])                      # p''
R_DR_LAP = Polynomial([0.0, 0.0, -2.0, 1.0])               # r d_r Delta p
R2_LAP2 = Polynomial([0.0, 0.0, 4.0, -4.0, 1.0])           # r^2 Delta^2 p
R4_LAP3 = Polynomial.fromroots([0, 0, 2, 2, 4, 4])         # r^4 Delta^3 p
R_DR_PR = Polynomial([0.0, -2.0, 1.0])                     # r (p'/r)'
R_DR_R_DR_PR = Polynomial([0.0, 4.0, -4.0, 1.0])           # r (r (p'/r)')'


def _falling(j: int) -> np.ndarray:
    """Coefficients of D (D-1) ... (D-j+1), i.e. signed Stirling numbers of the first kind."""
    return Polynomial.fromroots(np.arange(j)).coef if j else np.array([1.0])


def _combine(poly: Polynomial, delta: np.ndarray) -> np.ndarray:
    coef = poly.coef
    return sum(c * delta[n] for n, c in enumerate(coef) if c != 0.0)


@dataclass(frozen=True)
class CutoffProperty:
    name: str
    worst: float
    bound: float
    passed: bool


@dataclass(frozen=True, eq=False)
class CutoffP:
    """
    p_{c,R}. With c1 = c / K the log-corrected piece is

        p0 = r^2/2 + c1 ((r-1)^2/2 - log r (r^2-1)/4) + c1 (log r)^4 / 24 + c1 (log r)^5 / 24

    for 1 <= r/R <= R0/R. Past R0, p'/r continues linearly in log r and is
    switched off by a smoothstep of the given order over tail_width e-folds.
    """
    c: float
    R: float = 1.0
    K: float = 32.0
    order: int = 6
    tail_width: float = 16.0

    def __post_init__(self):
        if not (0.0 < self.c <= 0.1) or self.R < 1.0:
            raise error_from_code(
                CODE_PARAMETER_RANGE, f"cutoff needs 0 < c <= 0.1 and R >= 1, got c={self.c}, R={self.R}"
            )

    @property
    def c1(self) -> float:
        return self.c / self.K

    @property
    def log_R(self) -> float:
        return math.log(self.R)

    @property
    def log_R0(self) -> float:
        """log(R0 / R) = 2 / c1."""
        return 2.0 / self.c1

    @property
    def log_Rtilde(self) -> float:
        return self.log_R + self.log_R0 + self.tail_width

    # Middle piece: sum_alpha e^(alpha L) P_alpha(L)

    @cached_property
    def _middle(self) -> List[List[Tuple[int, Polynomial]]]:
        c1 = self.c1
        pieces = {
            2: Polynomial([0.5 + 0.5 * c1, -0.25 * c1]),
            1: Polynomial([-c1]),
            0: Polynomial([0.5 * c1, 0.25 * c1, 0.0, 0.0, c1 / 24.0, c1 / 24.0]),
        }
        table = []
        current = dict(pieces)
        for _ in range(N_MOMENTS):
            table.append(list(current.items()))
            current = {a: a * P + P.deriv() for a, P in current.items()}
        return table

    def _delta_middle(self, n: int, L: np.ndarray) -> np.ndarray:
        out = np.zeros_like(L)
        for alpha, P in self._middle[n]:
            out += np.exp((alpha - 2) * L) * P(L)
        return out

    # Truncation piece in y = log(r / R0): p'/r is cut off over tail_width e-folds

    @cached_property
    def _tail(self) -> Tuple[List[Polynomial], Polynomial, float]:
        """
        g(y) = (g0 + g1 y)(1 - S(y / W)) continues the middle piece's p'/r,
        which is linear in log r up to exp(-log R0) terms. Returns the
        moments delta_n = (d_y + 2)^(n-1) g, n >= 1, as polynomials in
        x = y / W, the primitive H giving delta_0, and delta_0 at R0.
        """
        at = np.array([self.log_R0])
        g0 = self._delta_middle(1, at)[0]
        g1 = self._delta_middle(2, at)[0] - 2.0 * g0
        W = self.tail_width
        G = Polynomial([g0, g1 * W]) * (1.0 - smoothstep(self.order))
        moments = [G]
        for _ in range(N_MOMENTS - 2):
            moments.append(2.0 * moments[-1] + moments[-1].deriv() / W)
        # d/dy (e^(2y) H) = e^(2y) g
        H = Polynomial([0.0])
        term = G
        for j in range(G.degree() + 1):
            H = H + (-1.0) ** j * term / 2.0 ** (j + 1)
            term = term.deriv() / W
        return moments, H, float(self._delta_middle(0, at)[0])

    def _delta_tail(self, n: int, y: np.ndarray) -> np.ndarray:
        moments, H, d0 = self._tail
        W = self.tail_width
        x = np.minimum(y / W, 1.0)
        if n > 0:
            return np.where(y >= W, 0.0, moments[n - 1](x))
        inside = np.exp(-2.0 * np.minimum(y, W)) * (d0 - H(0.0)) + H(x)
        return inside * np.exp(-2.0 * np.maximum(y - W, 0.0))

    def delta(self, n: int, log_r: np.ndarray) -> np.ndarray:
        """delta_n = r^-2 (r d/dr)^n p at log r."""
        L = np.asarray(log_r, dtype=float) - self.log_R
        out = np.full_like(L, 2.0 ** (n - 1))
        mid = (L > 0.0) & (L <= self.log_R0)
        if np.any(mid):
            out[mid] = self._delta_middle(n, L[mid])
        tail = L > self.log_R0
        if np.any(tail):
            out[tail] = self._delta_tail(n, L[tail] - self.log_R0)
        return out

    def deltas(self, log_r: np.ndarray) -> np.ndarray:
        return np.array([self.delta(n, log_r) for n in range(N_MOMENTS)])

    # Evaluators in physical variables (valid where r^2 is representable)

    def p(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return r**2 * self.delta(0, np.log(r))

    def dp(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return r * self.delta(1, np.log(r))

    def d2p(self, r: np.ndarray) -> np.ndarray:
        return _combine(DRDR_P, self.deltas(np.log(r)))

    def lap(self, r: np.ndarray) -> np.ndarray:
        return self.delta(2, np.log(r))

    def lap2(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return _combine(R2_LAP2, self.deltas(np.log(r))) / r**2

    def lap3(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return _combine(R4_LAP3, self.deltas(np.log(r))) / r**4

    # Verification

    def sweep_points(self, n: int = SWEEP_POINTS) -> np.ndarray:
        lo, hi = self.log_R - 5.0, self.log_Rtilde + 5.0
        start = self.log_R + self.log_R0
        seams = [self.log_R, start, self.log_Rtilde]
        near = [np.linspace(s - 2.0, s + 2.0, n // 10) for s in seams]
        tail = np.linspace(start, self.log_Rtilde, n // 10)
        return np.unique(np.concatenate([np.linspace(lo, hi, n), tail] + near))

    def properties(self, n: int = SWEEP_POINTS, C: float = 2.0) -> List[CutoffProperty]:
        L = self.sweep_points(n)
        d = self.deltas(L)
        c = self.c
        inner_zone = L <= self.log_R
        outer_zone = L >= self.log_Rtilde
        checks = [
            ("(1) p = r^2/2 inside R", float(np.max(np.abs(d[0][inner_zone] - 0.5))), 1e-14),
            ("(2) p constant beyond Rtilde", float(np.max(np.abs(d[1:, outer_zone]))), 0.0),
            ("(3) |p'| <= C r", float(np.max(np.abs(d[1]))), C),
            ("(3) |p''| <= C", float(np.max(np.abs(_combine(DRDR_P, d)))), C),
            ("(4) p'' >= -c", float(np.max(-_combine(DRDR_P, d))), c),
            ("(4) p'/r >= -c", float(np.max(-d[1])), c),
            ("(5) |r d_r Delta p| <= c", float(np.max(np.abs(_combine(R_DR_LAP, d)))), c),
            ("(6) Delta^2 p <= c r^-2", float(np.max(_combine(R2_LAP2, d))), c),
            ("(7) Delta^3 p >= -c r^-4", float(np.max(-_combine(R4_LAP3, d))), c),
            ("(8) |r (p'/r)'| <= c", float(np.max(np.abs(_combine(R_DR_PR, d)))), c),
            ("(9) |r (r (p'/r)')'| <= c", float(np.max(np.abs(_combine(R_DR_R_DR_PR, d)))), c),
        ]
        return [CutoffProperty(name, worst, bound, worst <= bound) for name, worst, bound in checks]

    def seam_jumps(self) -> Dict[str, np.ndarray]:
        """
        One-sided values at r = R of r^(j-2) p^(j), j = 0..5, and of the
        moments delta_0..delta_5 at r = R0. At R the right-hand values for
        j = 4, 5 are p0^(4)(1) and p0^(5)(1).
        """
        left_R = np.array([0.5, 1.0, 1.0, 0.0, 0.0, 0.0])
        at_R = np.array([0.0])
        delta_R = np.array([self._delta_middle(n, at_R)[0] for n in range(6)])
        right_R = np.array([delta_R[0]] + [float(np.dot(_falling(j), delta_R[: j + 1])) for j in range(1, 6)])
        moments, _, d0 = self._tail
        moments_right = np.array([d0] + [moments[n - 1](0.0) for n in range(1, 6)])
        at_R0 = np.array([self.log_R0])
        moments_left = np.array([self._delta_middle(n, at_R0)[0] for n in range(6)])
        return {
            "R.left": left_R,
            "R.right": right_R,
            "R0.left": moments_left,
            "R0.right": moments_right,
        }


def build_cutoff(c: float, R: float, K: float = 32.0, max_doublings: int = 8) -> CutoffP:
    """The cutoff for (c, R), doubling K until all nine properties pass."""
    for _ in range(max_doublings + 1):
        cutoff = CutoffP(c, R, K)
        failed = [p.name for p in cutoff.properties() if not p.passed]
        if not failed:
            logger.info(f"cutoff c={c} R={R}: c1 = c/{K:g}, log Rtilde = {cutoff.log_Rtilde:.4g}")
            return cutoff
        logger.debug(f"cutoff c={c} R={R} K={K:g} fails {failed}; doubling K")
        K *= 2.0
    raise error_from_code(CODE_PARAMETER_RANGE, f"no K up to {K:g} satisfies the cutoff properties for c={c}")
