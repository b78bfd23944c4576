"""
Modulation decomposition u = Phi(mu, lam, a, b) + w with the four
orthogonality conditions

    <Lambda Q_mu_ | w> = <Lambda Q_lam_ | w> = <Lambda Q_mu_ | w_dot> = <Lambda Q_lam_ | w_dot> = 0,

solved by damped Newton in the variables m = log mu, l = log lam,
a~ = nu0^(-k/2) a, b~ = nu0^(-k/2) b.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field

from bubblelab.core.ansatz.assemble import NU_MAX, assemble
from bubblelab.core.ansatz.distance import distance_plus
from bubblelab.core.errors import (
    CODE_NOT_NEAR_MANIFOLD,
    CODE_OUT_OF_NEIGHBORHOOD,
    NumericalError,
    error_from_code,
)
from bubblelab.core.evolver.models import FieldState
from bubblelab.core.grid import (
    PairFn,
    inner,
    norm_L2,
    norm_LamInvH,
    norm_pair_H,
    norm_pair_H2,
)
from bubblelab.core.modulation.models import ModState
from bubblelab.core.profiles.ground_state import constants, lambda_q_fn
from bubblelab.core.profiles.profile_set import ProfileSet, build_profile_set

logger = logging.getLogger(__name__)


class ExtractorOptions(BaseModel):
    orth_tol: float = Field(1e-9, gt=0.0)
    max_iter: int = Field(40, ge=1)
    fd_step: float = Field(1e-6, gt=0.0)
    newton_tol: float = Field(1e-13, gt=0.0)
    nu_max: float = Field(NU_MAX, gt=0.0, lt=1.0)
    eta0: float = Field(0.05, gt=0.0)
    check_distance: bool = False


@dataclass(frozen=True)
class NewtonReport:
    iterations: int
    residual: float
    dominance: float
    converged: bool


@dataclass(frozen=True, eq=False)
class Decomposition:
    state: ModState
    w: PairFn
    newton: NewtonReport
    k: int

    @cached_property
    def norms(self) -> dict:
        k = self.k
        return {
            "wH": norm_pair_H(self.w, k),
            "wdotL2": norm_L2(self.w.vel),
            "wH2": norm_pair_H2(self.w, k),
            "wLamInvH": norm_LamInvH(self.w, k),
        }

    def orthogonality(self) -> np.ndarray:
        """The four pairings, in the order (mu, w), (lam, w), (mu, w_dot), (lam, w_dot)."""
        grid, s = self.w.grid, self.state
        lq_mu = lambda_q_fn(grid, self.k, s.mu, l2=True)
        lq_lam = lambda_q_fn(grid, self.k, s.lam, l2=True)
        return np.array([inner(lq_mu, self.w.pos), inner(lq_lam, self.w.pos),
                         inner(lq_mu, self.w.vel), inner(lq_lam, self.w.vel)])


@dataclass
class _Pairings:
    """The rescaled orthogonality map G(m, l, a~, b~) for one field."""
    u: PairFn
    k: int
    nu0: float
    t: float
    profiles: ProfileSet
    nu_max: float

    @property
    def unit(self) -> float:
        return self.nu0 ** (self.k / 2.0)

    def state(self, z: np.ndarray) -> ModState:
        return ModState(t=self.t, mu=float(np.exp(z[0])), lam=float(np.exp(z[1])),
                        a=self.unit * float(z[2]), b=self.unit * float(z[3]))

    def remainder(self, z: np.ndarray) -> PairFn:
        ansatz = assemble(self.state(z), self.u.grid, self.k, self.profiles, nu_max=self.nu_max)
        return self.u - ansatz.pair

    def __call__(self, z: np.ndarray) -> np.ndarray:
        s = self.state(z)
        w = self.remainder(z)
        grid = self.u.grid
        lq_mu = lambda_q_fn(grid, self.k, s.mu, l2=True)
        lq_lam = lambda_q_fn(grid, self.k, s.lam, l2=True)
        return np.array([
            inner(lq_mu, w.pos) / s.mu,
            inner(lq_lam, w.pos) / s.lam,
            inner(lq_mu, w.vel) / self.unit,
            inner(lq_lam, w.vel) / self.unit,
        ])

    def jacobian(self, z: np.ndarray, h: float) -> np.ndarray:
        J = np.empty((4, 4))
        for j in range(4):
            e = np.zeros(4)
            e[j] = h
            J[:, j] = (self(z + e) - self(z - e)) / (2.0 * h)
        return J


def dominance_ratio(J: np.ndarray) -> float:
    """min_i |J_ii| / sum_{j != i} |J_ij|."""
    diag = np.abs(np.diag(J))
    off = np.sum(np.abs(J), axis=1) - diag
    return float(np.min(diag / np.maximum(off, 1e-300)))


def _crossing(x: np.ndarray, u: np.ndarray, i: int) -> float:
    """log r where u crosses pi/2 between nodes i and i+1."""
    level = 0.5 * np.pi
    frac = (level - u[i]) / (u[i + 1] - u[i])
    return float(x[i] + frac * (x[i + 1] - x[i]))


def cold_start(field: FieldState, k: int) -> ModState:
    """
    Scales from the innermost ascending and outermost descending pi/2
    crossings of u, velocities from the pairings of u_t with Lambda Q.
    """
    grid = field.grid
    u = field.u.values
    above = u >= 0.5 * np.pi
    up = np.flatnonzero(~above[:-1] & above[1:])
    down = np.flatnonzero(above[:-1] & ~above[1:])
    if len(up) == 0 or len(down) == 0:
        raise error_from_code(CODE_NOT_NEAR_MANIFOLD, "field has no two-bubble shape to start from")
    lam = float(np.exp(_crossing(grid.x, u, int(up[0]))))
    mu = float(np.exp(_crossing(grid.x, u, int(down[-1]))))
    kappa = constants(k).kappa
    b = inner(lambda_q_fn(grid, k, lam, l2=True), field.ut) / kappa
    a = inner(lambda_q_fn(grid, k, mu, l2=True), field.ut) / kappa
    guess = ModState(t=field.t, mu=mu, lam=lam, a=a, b=b)
    logger.debug(f"cold start guess {guess}")
    return guess


def decompose(
    field: FieldState,
    k: int,
    guess: Optional[ModState] = None,
    options: Optional[ExtractorOptions] = None,
    profiles: Optional[ProfileSet] = None,
) -> Decomposition:
    options = options or ExtractorOptions()
    profiles = profiles or build_profile_set(k)
    guess = guess or cold_start(field, k)
    kappa = constants(k).kappa

    if options.check_distance:
        d = distance_plus(field.pair, guess, k)
        if d >= options.eta0:
            raise error_from_code(
                CODE_OUT_OF_NEIGHBORHOOD, f"d+ = {d:.3g} is not below eta0 = {options.eta0}"
            )

    G = _Pairings(field.pair, k, guess.nu, field.t, profiles, options.nu_max)
    z = np.array([np.log(guess.mu), np.log(guess.lam), guess.a / G.unit, guess.b / G.unit])
    g = G(z)
    res = float(np.max(np.abs(g)))
    J = None
    iterations = 0
    converged = res <= options.newton_tol * kappa
    while not converged and iterations < options.max_iter:
        iterations += 1
        J = G.jacobian(z, options.fd_step)
        delta = np.linalg.solve(J, -g)
        t = 1.0
        while True:
            trial = z + t * delta
            try:
                g_trial = G(trial)
                res_trial = float(np.max(np.abs(g_trial)))
            except NumericalError:
                res_trial = np.inf
            if res_trial < res or t < 1e-9:
                break
            t *= 0.5
        if not np.isfinite(res_trial) or res_trial >= res:
            logger.debug(f"line search stalled at iteration {iterations}, residual {res:.3e}")
            break
        z, g, res = trial, g_trial, res_trial
        converged = res <= options.newton_tol * kappa

    if res > options.orth_tol * kappa:
        raise error_from_code(
            CODE_NOT_NEAR_MANIFOLD,
            f"orthogonality residual {res:.3e} after {iterations} Newton steps at t={field.t:g}",
        )
    J = J if J is not None else G.jacobian(z, options.fd_step)
    state = G.state(z)
    report = NewtonReport(iterations, res, dominance_ratio(J), converged)
    logger.debug(f"decomposed t={field.t:g}: {state} in {iterations} steps, residual {res:.2e}")
    return Decomposition(state, G.remainder(z), report, k)


def remainder_fn(field: FieldState, state: ModState, k: int, profiles: Optional[ProfileSet] = None) -> PairFn:
    """w = u - Phi(state) without any solve."""
    ansatz = assemble(state, field.grid, k, profiles)
    return field.pair - ansatz.pair
