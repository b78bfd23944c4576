import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple, Union

import numpy as np

from bubblelab.core.errors import (
    CODE_GRID_MISMATCH,
    CODE_INVALID_INPUT,
    CODE_NUMERICAL_DERIVATIVE,
    CODE_PARAMETER_RANGE,
    CODE_UNSUPPORTED_EQUIVARIANCE,
    error_from_code,
)

logger = logging.getLogger(__name__)

Number = Union[int, float]


@dataclass(frozen=True)
class EquivClass:
    """Equivariance index k of the radial reduction."""
    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 4:
            raise error_from_code(
                CODE_UNSUPPORTED_EQUIVARIANCE,
                f"equivariance class k={self.k} is not supported (need integer k >= 4)",
            )


@dataclass(frozen=True)
class RadialGrid:
    """
    Uniform grid in x = log r on [r_min, r_max].

    The measure r dr becomes r^2 dx, so trapezoid weights in x carry the
    Jacobian. Two grids are interchangeable iff their keys agree.
    """
    r_min: float = 1e-6
    r_max: float = 1e3
    n: int = 4096
    tol: float = 1e-8

    def __post_init__(self):
        if not (self.r_min > 0 and self.r_max > self.r_min):
            raise error_from_code(
                CODE_PARAMETER_RANGE, f"invalid grid bounds [{self.r_min}, {self.r_max}]"
            )
        if self.n < 16:
            raise error_from_code(CODE_PARAMETER_RANGE, f"grid needs at least 16 nodes, got {self.n}")

    @property
    def key(self) -> Tuple[float, float, int]:
        return (float(self.r_min), float(self.r_max), int(self.n))

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(np.log(self.r_min), np.log(self.r_max), self.n)

    @cached_property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @cached_property
    def r(self) -> np.ndarray:
        return np.exp(self.x)

    @property
    def nodes(self) -> np.ndarray:
        return self.r

    @cached_property
    def trap(self) -> np.ndarray:
        w = np.full(self.n, self.dx)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature weights for integrals against r dr."""
        return self.trap * self.r**2

    def rescaled(self, s: float) -> "RadialGrid":
        return RadialGrid(self.r_min * s, self.r_max * s, self.n, self.tol)

    def check_same(self, other: "RadialGrid") -> None:
        if self.key != other.key:
            raise error_from_code(
                CODE_GRID_MISMATCH, f"grid mismatch: {self.key} vs {other.key}"
            )

    # Quadrature

    def integrate(
        self,
        values: np.ndarray,
        exp0: Optional[float] = None,
        log0: bool = False,
        exp_inf: Optional[float] = None,
    ) -> float:
        """
        Integral of f against r dr, with analytic tails beyond the grid
        when the asymptotic exponents are declared.
        """
        values = np.asarray(values, dtype=float)
        total = float(np.dot(self.weights, values))
        return total + self._tail0(values, exp0, log0) + self._tail_inf(values, exp_inf)

    def integrate_dx(self, values: np.ndarray) -> float:
        """Integral of f against dx = dr / r."""
        return float(np.dot(self.trap, values))

    def _tail0(self, values: np.ndarray, p: Optional[float], log0: bool) -> float:
        if p is None or p + 2.0 <= 0:
            return 0.0
        f0, r0, x0 = values[0], self.r[0], self.x[0]
        q = p + 2.0
        if log0 and x0 != 0.0:
            return float(f0 * r0**2 / x0 * (x0 / q - 1.0 / q**2))
        return float(f0 * r0**2 / q)

    def _tail_inf(self, values: np.ndarray, p: Optional[float]) -> float:
        if p is None or p + 2.0 >= 0:
            return 0.0
        return float(-values[-1] * self.r[-1] ** 2 / (p + 2.0))

    # Differentiation in x

    def _ghosts(
        self,
        values: np.ndarray,
        exp0: Optional[float],
        log0: bool,
        exp_inf: Optional[float],
    ) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
        h = self.dx
        steps = np.array([2.0, 1.0])
        left = right = None
        if exp0 is not None:
            left = values[0] * np.exp(-exp0 * steps * h)
            if log0 and self.x[0] != 0.0:
                left = left * (self.x[0] - steps * h) / self.x[0]
        if exp_inf is not None:
            right = values[-1] * np.exp(exp_inf * steps[::-1] * h)
        return left, right

    def d1(
        self,
        values: np.ndarray,
        exp0: Optional[float] = None,
        log0: bool = False,
        exp_inf: Optional[float] = None,
    ) -> np.ndarray:
        """Fourth-order derivative in x = log r (i.e. r d/dr)."""
        f = np.asarray(values, dtype=float)
        h = self.dx
        left, right = self._ghosts(f, exp0, log0, exp_inf)
        ext = np.concatenate([left if left is not None else np.zeros(2), f,
                              right if right is not None else np.zeros(2)])
        out = (ext[:-4] - 8.0 * ext[1:-3] + 8.0 * ext[3:-1] - ext[4:]) / (12.0 * h)
        if left is None:
            out[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12.0 * h)
            out[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12.0 * h)
        if right is None:
            out[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12.0 * h)
            out[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12.0 * h)
        return _finite(out, "first derivative")

    def d2(
        self,
        values: np.ndarray,
        exp0: Optional[float] = None,
        log0: bool = False,
        exp_inf: Optional[float] = None,
    ) -> np.ndarray:
        """Fourth-order second derivative in x = log r."""
        f = np.asarray(values, dtype=float)
        h2 = self.dx**2
        left, right = self._ghosts(f, exp0, log0, exp_inf)
        ext = np.concatenate([left if left is not None else np.zeros(2), f,
                              right if right is not None else np.zeros(2)])
        out = (-ext[:-4] + 16.0 * ext[1:-3] - 30.0 * ext[2:-2] + 16.0 * ext[3:-1] - ext[4:]) / (12.0 * h2)
        if left is None:
            out[0] = (45 * f[0] - 154 * f[1] + 214 * f[2] - 156 * f[3] + 61 * f[4] - 10 * f[5]) / (12.0 * h2)
            out[1] = (10 * f[0] - 15 * f[1] - 4 * f[2] + 14 * f[3] - 6 * f[4] + f[5]) / (12.0 * h2)
        if right is None:
            out[-1] = (45 * f[-1] - 154 * f[-2] + 214 * f[-3] - 156 * f[-4] + 61 * f[-5] - 10 * f[-6]) / (12.0 * h2)
            out[-2] = (10 * f[-1] - 15 * f[-2] - 4 * f[-3] + 14 * f[-4] - 6 * f[-5] + f[-6]) / (12.0 * h2)
        return _finite(out, "second derivative")


def _finite(values: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise error_from_code(CODE_NUMERICAL_DERIVATIVE, f"non-finite {what} on grid")
    return values


def _min_exp(p: Optional[float], q: Optional[float]) -> Optional[float]:
    if p is None or q is None:
        return None
    return min(p, q)


def _max_exp(p: Optional[float], q: Optional[float]) -> Optional[float]:
    if p is None or q is None:
        return None
    return max(p, q)


def _add_exp(p: Optional[float], q: Optional[float]) -> Optional[float]:
    if p is None or q is None:
        return None
    return p + q


@dataclass(frozen=True, eq=False)
class RadialFn:
    """
    Samples of a radial function plus its declared asymptotics:
    |f| ~ r^exp0 (times |log r| if log0) as r -> 0 and |f| ~ r^exp_inf as
    r -> infinity. None means unknown; tails and ghosts are then skipped.
    """
    grid: RadialGrid
    values: np.ndarray
    exp0: Optional[float] = None
    log0: bool = False
    exp_inf: Optional[float] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise error_from_code(
                CODE_INVALID_INPUT, f"values of shape {values.shape} on a grid of {self.grid.n} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise error_from_code(CODE_INVALID_INPUT, "radial function has non-finite samples")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "RadialFn":
        return cls(grid, np.zeros(grid.n))

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    def with_values(self, values: np.ndarray, **overrides) -> "RadialFn":
        spec = dict(exp0=self.exp0, log0=self.log0, exp_inf=self.exp_inf)
        spec.update(overrides)
        return RadialFn(self.grid, values, **spec)

    def times_power(self, p: float) -> "RadialFn":
        """f(r) r^p."""
        return RadialFn(
            self.grid, self.values * self.grid.r**p,
            _add_exp(self.exp0, p), self.log0, _add_exp(self.exp_inf, p),
        )

    def __neg__(self) -> "RadialFn":
        return self.with_values(-self.values)

    def __add__(self, other: Union["RadialFn", Number]) -> "RadialFn":
        if isinstance(other, RadialFn):
            self.grid.check_same(other.grid)
            exp0 = _min_exp(self.exp0, other.exp0)
            log0 = (self.log0 and self.exp0 == exp0) or (other.log0 and other.exp0 == exp0)
            return RadialFn(
                self.grid, self.values + other.values, exp0, bool(log0),
                _max_exp(self.exp_inf, other.exp_inf),
            )
        if other == 0:
            return self
        return RadialFn(self.grid, self.values + other, _min_exp(self.exp0, 0.0), False,
                        _max_exp(self.exp_inf, 0.0))

    __radd__ = __add__

    def __sub__(self, other: Union["RadialFn", Number]) -> "RadialFn":
        return self + (-other)

    def __rsub__(self, other: Number) -> "RadialFn":
        return (-self) + other

    def __mul__(self, other: Union["RadialFn", Number]) -> "RadialFn":
        if isinstance(other, RadialFn):
            self.grid.check_same(other.grid)
            return RadialFn(
                self.grid, self.values * other.values,
                _add_exp(self.exp0, other.exp0), self.log0 or other.log0,
                _add_exp(self.exp_inf, other.exp_inf),
            )
        return self.with_values(self.values * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "RadialFn":
        return self.with_values(self.values / float(other))


@dataclass(frozen=True, eq=False)
class PairFn:
    """A pair (w, w_dot) on a single grid."""
    pos: RadialFn
    vel: RadialFn

    def __post_init__(self):
        self.pos.grid.check_same(self.vel.grid)

    @property
    def grid(self) -> RadialGrid:
        return self.pos.grid

    def __add__(self, other: "PairFn") -> "PairFn":
        return PairFn(self.pos + other.pos, self.vel + other.vel)

    def __sub__(self, other: "PairFn") -> "PairFn":
        return PairFn(self.pos - other.pos, self.vel - other.vel)

    def __mul__(self, c: Number) -> "PairFn":
        return PairFn(self.pos * c, self.vel * c)

    __rmul__ = __mul__


# Inner product and norms (r dr convention, no 2*pi)


def inner(f: RadialFn, g: RadialFn) -> float:
    f.grid.check_same(g.grid)
    prod = f * g
    return f.grid.integrate(prod.values, prod.exp0, prod.log0, prod.exp_inf)


def norm_L2(f: RadialFn) -> float:
    return float(np.sqrt(max(inner(f, f), 0.0)))


def lambda_values(f: RadialFn) -> np.ndarray:
    return f.grid.d1(f.values, f.exp0, f.log0, f.exp_inf)


def apply_Lambda(f: RadialFn) -> RadialFn:
    """r d/dr, the generator of H-scaling."""
    return f.with_values(lambda_values(f))


def apply_Lambda0(f: RadialFn) -> RadialFn:
    """1 + r d/dr, the generator of L2-scaling."""
    return f.with_values(f.values + lambda_values(f))


def d_r(f: RadialFn) -> RadialFn:
    return RadialFn(f.grid, lambda_values(f) / f.grid.r, _add_exp(f.exp0, -1.0), f.log0,
                    _add_exp(f.exp_inf, -1.0))


def norm_H(f: RadialFn, k: int) -> float:
    """||f||_H^2 = int (f_r^2 + k^2 f^2 / r^2) r dr."""
    fx = lambda_values(f)
    dens = (fx**2 + k**2 * f.values**2) / f.grid.r**2
    exp0 = None if f.exp0 is None else 2 * f.exp0 - 2
    exp_inf = None if f.exp_inf is None else 2 * f.exp_inf - 2
    return float(np.sqrt(max(f.grid.integrate(dens, exp0, f.log0, exp_inf), 0.0)))


def norm_H2(f: RadialFn, k: int) -> float:
    from bubblelab.core.operators import apply_L0

    return norm_L2(apply_L0(f, k))


def norm_pair_H(w: PairFn, k: int) -> float:
    return float(np.hypot(norm_H(w.pos, k), norm_L2(w.vel)))


def norm_pair_H2(w: PairFn, k: int) -> float:
    """||w||_{H^2 x H}, the second-order energy space norm."""
    return float(np.hypot(norm_H2(w.pos, k), norm_H(w.vel, k)))


def norm_LamInvH(w: PairFn, k: int) -> float:
    return norm_pair_H(PairFn(apply_Lambda(w.pos), apply_Lambda0(w.vel)), k)


def norm_Linf(f: RadialFn) -> float:
    return float(np.max(np.abs(f.values)))

