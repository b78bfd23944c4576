"""
Mixed energy-virial functionals of a remainder w = (w, w_dot) about the
ansatz Phi at a modulation state:

    E1 = 1/2 <w_dot|w_dot> + 1/2 <L_Phi w|w>,        V1 = <A0(lam) w | w_dot>,         H1 = E1 - b V1
    E2 = 1/2 <w_dot|L_Phi w_dot> + 1/2 ||L_Phi w||^2,
    V2 = <A0 w | L_lam w_dot> - 2 <A0 w_dot | L_lam w>,                                H2 = E2 - b V2
    E3 = 1/2 ||Lambda0 w_dot||^2 + 1/2 <Lambda w | L_Phi Lambda w>
"""
import logging
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional

import numpy as np

from bubblelab.core.ansatz.assemble import assemble
from bubblelab.core.errors import CODE_INVALID_INPUT, error_from_code
from bubblelab.core.functionals.cutoff import CutoffP
from bubblelab.core.functionals.virial import VirialOp
from bubblelab.core.grid import (
    PairFn,
    RadialFn,
    RadialGrid,
    apply_Lambda,
    apply_Lambda0,
    inner,
    lambda_values,
    norm_H,
    norm_L2,
    norm_LamInvH,
    norm_pair_H,
)
from bubblelab.core.modulation.models import ModState
from bubblelab.core.operators import apply_Llam, apply_LPhi
from bubblelab.core.profiles.ground_state import constants, lambda_q_fn
from bubblelab.core.profiles.profile_set import ProfileSet

logger = logging.getLogger(__name__)

ORTH_TOL = 1e-6


@dataclass(frozen=True)
class EnergyVirial:
    E1: float
    V1: float
    H1: float
    E2: float
    V2: float
    H2: float
    E3: float

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


def orthogonality_residual(state: ModState, w: PairFn, k: int) -> float:
    """Largest of the four pairings with Lambda Q, relative to sqrt(kappa) times the size of w."""
    grid = w.grid
    qs = [lambda_q_fn(grid, k, s, l2=True) for s in (state.mu, state.lam)]
    pairings = [inner(q, f) for q in qs for f in (w.pos, w.vel)]
    scale = np.sqrt(constants(k).kappa) * (norm_L2(w.pos) + norm_L2(w.vel))
    worst = float(np.max(np.abs(pairings)))
    return worst / scale if scale > 0 else worst


def check_orthogonal(state: ModState, w: PairFn, k: int, tol: float = ORTH_TOL) -> None:
    res = orthogonality_residual(state, w, k)
    if res > tol:
        raise error_from_code(
            CODE_INVALID_INPUT, f"remainder is not orthogonal to the kernel directions (residual {res:.3e})"
        )


def quadratic_form(phi: np.ndarray, f: RadialFn, k: int) -> float:
    """<L_Phi f | f> = int (f_r^2 + k^2 cos(2 Phi) f^2 / r^2) r dr."""
    grid = f.grid
    fx = lambda_values(f)
    dens = (fx**2 + k**2 * np.cos(2.0 * phi) * f.values**2) / grid.r**2
    exp0 = None if f.exp0 is None else 2 * f.exp0 - 2
    exp_inf = None if f.exp_inf is None else 2 * f.exp_inf - 2
    return grid.integrate(dens, exp0, f.log0, exp_inf)


def energy_virial(
    state: ModState,
    w: PairFn,
    k: int,
    cutoff: CutoffP,
    phi: Optional[np.ndarray] = None,
    profiles: Optional[ProfileSet] = None,
    tol: float = ORTH_TOL,
) -> EnergyVirial:
    check_orthogonal(state, w, k, tol)
    grid = w.grid
    if phi is None:
        phi = assemble(state, grid, k, profiles).phi.values
    op = VirialOp(state.lam, cutoff, grid)
    pos, vel = w.pos, w.vel

    E1 = 0.5 * inner(vel, vel) + 0.5 * quadratic_form(phi, pos, k)
    V1 = inner(op.apply_A0(pos), vel)

    L_pos = apply_LPhi(phi, pos, k)
    E2 = 0.5 * quadratic_form(phi, vel, k) + 0.5 * inner(L_pos, L_pos)
    V2 = inner(op.apply_A0(pos), apply_Llam(state.lam, vel, k)) \
        - 2.0 * inner(op.apply_A0(vel), apply_Llam(state.lam, pos, k))

    lam_vel = apply_Lambda0(vel)
    E3 = 0.5 * inner(lam_vel, lam_vel) + 0.5 * quadratic_form(phi, apply_Lambda(pos), k)
    b = state.b
    return EnergyVirial(E1, V1, E1 - b * V1, E2, V2, E2 - b * V2, E3)


def functional_H1(state: ModState, w: PairFn, k: int, cutoff: CutoffP, **kwargs) -> float:
    return energy_virial(state, w, k, cutoff, **kwargs).H1


def functional_H2(state: ModState, w: PairFn, k: int, cutoff: CutoffP, **kwargs) -> float:
    return energy_virial(state, w, k, cutoff, **kwargs).H2


def functional_E3(state: ModState, w: PairFn, k: int, cutoff: CutoffP, **kwargs) -> float:
    return energy_virial(state, w, k, cutoff, **kwargs).E3


def project_kernel(state: ModState, f: RadialFn, k: int) -> RadialFn:
    """L2-orthogonal projection of f off span(Lambda Q_mu, Lambda Q_lam)."""
    qs = [lambda_q_fn(f.grid, k, s, l2=True) for s in (state.mu, state.lam)]
    gram = np.array([[inner(p, q) for q in qs] for p in qs])
    coef = np.linalg.solve(gram, [inner(q, f) for q in qs])
    return f.with_values(f.values - sum(c * q.values for c, q in zip(coef, qs)))


def orthogonal_battery(state: ModState, grid: RadialGrid, k: int, n: int = 20, seed: int = 0) -> List[PairFn]:
    """
    Random bump pairs between the two scales, projected onto the orthogonal
    subspace and normalized in the energy norm.
    """
    rng = np.random.default_rng(seed)
    lo, hi = np.log(state.lam) - 2.0, np.log(state.mu) + 2.0
    out = []
    for _ in range(n):
        parts = []
        for _ in range(2):
            x0, s = rng.uniform(lo, hi), rng.uniform(0.3, 1.2)
            vals = rng.normal() * np.exp(-0.5 * ((grid.x - x0) / s) ** 2)
            parts.append(project_kernel(state, RadialFn(grid, vals), k))
        pos = parts[0] / norm_H(parts[0], k)
        vel = parts[1] / norm_L2(parts[1])
        w = PairFn(pos, vel * rng.uniform(0.2, 2.0))
        out.append(w * (1.0 / norm_pair_H(w, k)))
    return out


def comparability(
    state: ModState,
    grid: RadialGrid,
    k: int,
    cutoff: CutoffP,
    n: int = 20,
    seed: int = 0,
    profiles: Optional[ProfileSet] = None,
) -> Dict[str, np.ndarray]:
    """
    Per battery member: ||w||^2 / H1, ||w||^2 / E1, |V1| / ||w||^2 (energy norm)
    and (E3 - ||w||^2_{Lambda^-1 H} / 2) / ||w||_H^2.
    """
    phi = assemble(state, grid, k, profiles).phi.values
    rows = []
    for w in orthogonal_battery(state, grid, k, n, seed):
        f = energy_virial(state, w, k, cutoff, phi=phi)
        norm2 = norm_pair_H(w, k) ** 2
        rows.append((
            norm2 / f.H1,
            norm2 / f.E1,
            abs(f.V1) / norm2,
            (f.E3 - 0.5 * norm_LamInvH(w, k) ** 2) / norm_H(w.pos, k) ** 2,
        ))
    data = np.array(rows)
    return {"H1": data[:, 0], "E1": data[:, 1], "V1": data[:, 2], "E3": data[:, 3]}
