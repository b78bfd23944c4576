"""The formal modulation system for (mu, lam, a, b) and its approximants."""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from bubblelab.core.errors import CODE_INVALID_INPUT, CODE_STIFF_FAILURE, error_from_code
from bubblelab.core.modulation.models import ModRates, ModState, Trajectory
from bubblelab.core.profiles.ground_state import constants

logger = logging.getLogger(__name__)

T_ANCHOR = 1e8


def _rhs_vector(y: np.ndarray, k: int, gamma: float) -> np.ndarray:
    mu, lam, a, b = y
    return np.array([
        a,
        -b,
        -gamma * lam**k * mu ** (-k - 1),
        -gamma * lam ** (k - 1) * mu ** (-k),
    ])


def rhs(s: ModState, k: int) -> np.ndarray:
    """(mu', lam', a', b') = (a, -b, -gamma lam^k mu^(-k-1), -gamma lam^(k-1) mu^(-k))."""
    return _rhs_vector(s.as_vector(), k, constants(k).gamma_k)


def state_derivative(s: ModState, k: int) -> ModRates:
    d = rhs(s, k)
    return ModRates(mu=float(d[0]), lam=float(d[1]), a=float(d[2]), b=float(d[3]))


def hamiltonian(s: ModState, k: int) -> float:
    """(a^2 + b^2)/2 - (gamma/k) (lam/mu)^k, conserved by the system."""
    return _hamiltonian_vector(s.as_vector(), k, constants(k).gamma_k)


def _hamiltonian_vector(y: np.ndarray, k: int, gamma: float) -> float:
    mu, lam, a, b = y
    return float(0.5 * (a**2 + b**2) - gamma / k * (lam / mu) ** k)


def analytic_approx(t: float, k: int) -> ModState:
    """The closed-form approximants solving the constant-mu system."""
    c = constants(k)
    lam = c.q_k * t ** (-2.0 / (k - 2))
    return ModState(
        t=float(t),
        mu=1.0 - k / (2.0 * (k + 2)) * lam**2,
        lam=lam,
        a=k / (k + 2.0) * c.rho_k * lam ** (k / 2.0 + 1.0),
        b=c.rho_k * lam ** (k / 2.0),
    )


def integrate(
    s0: ModState,
    t_end: float,
    k: int,
    tol: float = 1e-10,
    t_eval: Optional[Sequence[float]] = None,
) -> Trajectory:
    """Adaptive DOP853 integration, forward or backward; stops early if lam reaches 0."""
    gamma = constants(k).gamma_k
    y0 = s0.as_vector()
    atol = tol * np.abs(y0) * 1e-6 + 1e-300

    def lam_zero(t, y):
        return y[1]

    lam_zero.terminal = True
    lam_zero.direction = -1

    sol = solve_ivp(
        lambda t, y: _rhs_vector(y, k, gamma),
        (s0.t, t_end),
        y0,
        method="DOP853",
        rtol=tol,
        atol=atol,
        t_eval=None if t_eval is None else np.asarray(t_eval, dtype=float),
        events=lam_zero,
    )
    if sol.status == -1:
        raise error_from_code(CODE_STIFF_FAILURE, f"modulation integration failed: {sol.message}")
    collapsed = sol.status == 1
    if collapsed:
        logger.warning(f"lam reached 0 at t={sol.t_events[0][0]:.6g}")
    traj = Trajectory(sol.t, sol.y[0], sol.y[1], sol.y[2], sol.y[3], meta={
        "tol": tol, "nfev": int(sol.nfev), "method": "DOP853", "collapsed": bool(collapsed),
    })
    h0 = _hamiltonian_vector(y0, k, gamma)
    h1 = _hamiltonian_vector(sol.y[:, -1], k, gamma) if sol.y.shape[1] else h0
    traj.meta["hamiltonian_drift"] = abs(h1 - h0)
    return traj


def _deviation_rhs(s: float, y: np.ndarray, k: int, q: float) -> np.ndarray:
    """
    Relative corrections to the approximants in s = log t:
    lam = lam~(1 + lam~^2 E_lam), b = b~(1 + lam~^2 E_b), a = a~(1 + lam~^2 E_a),
    mu = 1 - c lam~^2 + lam~^4 D with c = k / (2(k+2)).
    """
    e_lam, e_b, e_a, d = y
    beta = 2.0 / (k - 2)
    lt = q * np.exp(-beta * s)
    lt2 = lt * lt
    c = k / (2.0 * (k + 2))
    log_mu = np.log1p(-c * lt2 + lt2 * lt2 * d)
    log_ratio = np.log1p(lt2 * e_lam)
    rb = np.expm1((k - 1) * log_ratio - k * log_mu) / lt2
    ra = np.expm1(k * log_ratio - (k + 1) * log_mu) / lt2
    return np.array([
        2.0 * beta * e_lam + beta * (e_lam - e_b),
        2.0 * beta * e_b + 0.5 * k * beta * (e_b - rb),
        2.0 * beta * e_a + 0.5 * (k + 2) * beta * (e_a - ra),
        4.0 * beta * d + k * beta / (k + 2.0) * e_a,
    ])


@dataclass
class FormalBranch:
    """The formal solution sampled at t, with its deviation from the approximants."""
    trajectory: Trajectory
    lam_tilde: np.ndarray
    dev_lam: np.ndarray
    dev_mu: np.ndarray
    dev_a: np.ndarray
    dev_b: np.ndarray


def formal_branch(
    times: Sequence[float],
    k: int,
    t_anchor: float = T_ANCHOR,
    tol: float = 1e-12,
) -> FormalBranch:
    """
    Solution of the modulation system asymptotic to the approximants:
    seeded with zero correction at t_anchor and integrated backward.
    Corrections decay backward, so the anchor error stays below tolerance.
    """
    c = constants(k)
    times = np.sort(np.asarray(times, dtype=float))
    s_eval = np.log(times[::-1])
    s_anchor = np.log(t_anchor)
    if s_eval[0] > s_anchor:
        raise error_from_code(CODE_INVALID_INPUT, f"times must not exceed the anchor {t_anchor}")

    sol = solve_ivp(
        lambda s, y: _deviation_rhs(s, y, k, c.q_k),
        (s_anchor, s_eval[-1]),
        np.zeros(4),
        method="DOP853",
        rtol=tol,
        atol=tol,
        t_eval=s_eval,
    )
    if sol.status != 0:
        raise error_from_code(CODE_STIFF_FAILURE, f"formal branch integration failed: {sol.message}")

    e_lam, e_b, e_a, d = (row[::-1] for row in sol.y)
    beta = 2.0 / (k - 2)
    lt = c.q_k * times ** (-beta)
    lt2 = lt * lt
    cc = k / (2.0 * (k + 2))
    b_t = c.rho_k * lt ** (k / 2.0)
    a_t = k / (k + 2.0) * c.rho_k * lt ** (k / 2.0 + 1.0)
    dev_lam = lt * lt2 * e_lam
    dev_b = b_t * lt2 * e_b
    dev_a = a_t * lt2 * e_a
    dev_mu = lt2 * lt2 * d
    traj = Trajectory(
        t=times,
        mu=1.0 - cc * lt2 + dev_mu,
        lam=lt + dev_lam,
        a=a_t + dev_a,
        b=b_t + dev_b,
        meta={"t_anchor": t_anchor, "tol": tol, "nfev": int(sol.nfev)},
    )
    return FormalBranch(traj, lt, dev_lam, dev_mu, dev_a, dev_b)


def formal_state(t: float, k: int, t_anchor: float = T_ANCHOR) -> ModState:
    return formal_branch([t], k, t_anchor).trajectory.state(0)


def asymptotic_state(t: float, k: int) -> ModState:
    """
    Leading power laws along the branch, written with explicit prefactors:
    lam ~ q t^-beta, b ~ beta q t^-(beta+1), a ~ k/(k+2) rho q^(k/2+1) t^-beta(k/2+1), mu ~ 1.
    """
    c = constants(k)
    beta = 2.0 / (k - 2)
    return ModState(
        t=float(t),
        mu=1.0,
        lam=c.q_k * t ** (-beta),
        a=k / (k + 2.0) * c.rho_k * c.q_k ** (k / 2.0 + 1.0) * t ** (-beta * (k / 2.0 + 1.0)),
        b=beta * c.q_k * t ** (-beta - 1.0),
    )
