"""The refined distance d+ of a field pair to the two-bubble family."""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy.optimize import minimize

from bubblelab.core.ansatz.assemble import two_bubble
from bubblelab.core.errors import CODE_OUT_OF_NEIGHBORHOOD, error_from_code
from bubblelab.core.grid import PairFn, norm_H, norm_L2
from bubblelab.core.modulation.models import ModState
from bubblelab.core.profiles.ground_state import lambda_q

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchBox:
    """
    Admissible region around the seed: |log(lam/lam0)|, |log(mu/mu0)| <= log_scale
    and |a|, |b| <= velocity * nu0^(k/2).
    """
    log_scale: float = 1.0
    velocity: float = 4.0
    n_starts: int = 4
    seed: int = 0


@dataclass
class DistanceResult:
    value: float
    state: ModState
    n_evals: int
    terms: Dict[str, float] = field(default_factory=dict)


def distance_terms(u: PairFn, state: ModState, k: int) -> Dict[str, float]:
    """The five summands of the d+ objective at fixed parameters."""
    grid = u.grid
    r = grid.r
    lam, mu, a, b, nu = state.lam, state.mu, state.a, state.b, state.nu
    diff = u.pos.with_values(u.pos.values - two_bubble(k, r, lam, mu))
    vel = u.vel.values - b * lambda_q(k, r / lam) / lam - a * lambda_q(k, r / mu) / mu
    weight = nu ** (-k / 2.0)
    return {
        "position": norm_H(diff, k),
        "velocity": weight * norm_L2(u.vel.with_values(vel)),
        "separation": nu**k,
        "a": a * a * (1.0 + abs(a) * weight),
        "b": b * b * (1.0 + abs(b) * weight),
    }


def distance_objective(u: PairFn, state: ModState, k: int) -> float:
    return float(sum(distance_terms(u, state, k).values()))


def _state_of(z: np.ndarray, guess: ModState, unit: float) -> ModState:
    return ModState(
        t=guess.t,
        lam=guess.lam * np.exp(z[0]),
        mu=guess.mu * np.exp(z[1]),
        a=unit * z[2],
        b=unit * z[3],
    )


def minimize_distance(
    u: PairFn,
    guess: ModState,
    k: int,
    box: Optional[SearchBox] = None,
    xatol: float = 1e-10,
) -> DistanceResult:
    """
    Minimize the d+ objective by Nelder-Mead in the variables
    (log lam - log lam0, log mu - log mu0, a / nu0^(k/2), b / nu0^(k/2)),
    restarted from a few seeded points of the box.
    """
    box = box or SearchBox()
    unit = guess.nu ** (k / 2.0)
    z0 = np.array([0.0, 0.0, guess.a / unit, guess.b / unit])
    rng = np.random.default_rng(box.seed)
    steps = np.array([0.05, 0.05, 0.5, 0.5])

    def f(z: np.ndarray) -> float:
        return distance_objective(u, _state_of(z, guess, unit), k)

    starts = [z0] + [
        z0 + rng.uniform(-0.5, 0.5, size=4) * steps for _ in range(max(box.n_starts - 1, 0))
    ]
    best, n_evals = None, 0
    for start in starts:
        simplex = np.vstack([start, start + np.diag(steps)])
        res = minimize(
            f, start, method="Nelder-Mead",
            options={"initial_simplex": simplex, "xatol": xatol, "fatol": 1e-14 * max(f(start), 1e-300),
                     "maxiter": 20000, "maxfev": 40000},
        )
        n_evals += int(res.nfev)
        if best is None or res.fun < best.fun:
            best = res

    z = best.x
    if max(abs(z[0]), abs(z[1])) > box.log_scale or max(abs(z[2]), abs(z[3])) > box.velocity:
        raise error_from_code(
            CODE_OUT_OF_NEIGHBORHOOD,
            f"d+ minimizer left the search box at z={np.array2string(z, precision=3)}",
        )
    state = _state_of(z, guess, unit)
    logger.debug(f"d+ = {best.fun:.6g} after {n_evals} evaluations")
    return DistanceResult(float(best.fun), state, n_evals, distance_terms(u, state, k))


def distance_plus(u: PairFn, guess: ModState, k: int, box: Optional[SearchBox] = None) -> float:
    return minimize_distance(u, guess, k, box).value
