"""
Assembly of the refined two-bubble ansatz (Phi, Phi_dot) and of the
residuals Psi_1 = Phi_dot - d_t Phi and Psi_2 = Delta Phi - f(Phi)/r^2 - d_t Phi_dot.

Everything is evaluated from closed forms for Q and from the tabulated
profiles A, B, Btilde; no derivative is taken on the evaluation grid.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from bubblelab.core.ansatz.terms import PHI_TERMS, PHIDOT_TERMS, Term
from bubblelab.core.errors import CODE_BUBBLES_NOT_SEPARATED, error_from_code
from bubblelab.core.grid import PairFn, RadialFn, RadialGrid, inner
from bubblelab.core.modulation.models import ModRates, ModState
from bubblelab.core.operators import sech
from bubblelab.core.profiles.ground_state import (
    constants,
    ground_state,
    ground_state_complement,
    lambda0_lambda_q,
    lambda_lambda_q,
    lambda_q,
    lambda_q_fn,
)
from bubblelab.core.profiles.profile_set import Profile, ProfileSet, build_profile_set, source_values
from bubblelab.core.report import write_columns

logger = logging.getLogger(__name__)

NU_MAX = 0.3

LAMBDA_OF = {"X": "LX", "LX": "LLX"}
LAMBDA0_OF = {"X": "L0X", "LX": "L0LX"}


@dataclass(frozen=True)
class GroundStateProfile:
    """Q behind the same evaluate(r, which) interface as the tabulated profiles."""
    k: int
    name: str = "Q"

    def evaluate(self, r: np.ndarray, which: str = "X") -> np.ndarray:
        k = self.k
        if which == "X":
            return ground_state(k, r)
        if which == "LX":
            return lambda_q(k, r)
        if which == "L0X":
            return ground_state(k, r) + lambda_q(k, r)
        if which == "L0LX":
            return lambda0_lambda_q(k, r)
        if which == "LLX":
            return lambda_lambda_q(k, r)
        raise KeyError(which)


@dataclass(frozen=True, eq=False)
class CorrectionProfile:
    """
    A tabulated profile whose Lambda^2 X is taken from its equation,
    Lambda^2 X = k^2 cos(2Q) X - r^2 F, rather than from the tables.
    """
    profile: Profile
    k: int

    def evaluate(self, r: np.ndarray, which: str = "X") -> np.ndarray:
        if which != "LLX":
            return self.profile.evaluate(r, which)
        k = self.k
        cos2q = 1.0 - 2.0 * sech(k * np.log(r)) ** 2
        return k**2 * cos2q * self.profile.evaluate(r, "X") - r**2 * source_values(self.profile.name, k, r)


@dataclass(eq=False)
class _Sampler:
    """Memoized profile fields X(r/s) at the two bubble scales."""
    r: np.ndarray
    state: ModState
    sources: Dict[str, object]
    _memo: Dict[Tuple[str, str, str], np.ndarray] = field(default_factory=dict, repr=False)

    def scale(self, which: str) -> float:
        return self.state.lam if which == "lam" else self.state.mu

    def __call__(self, profile: str, which: str, scale: str, l2: bool = False) -> np.ndarray:
        key = (profile, which, scale)
        s = self.scale(scale)
        if key not in self._memo:
            self._memo[key] = self.sources[profile].evaluate(self.r / s, which)
        vals = self._memo[key]
        return vals / s if l2 else vals


def _sources(k: int, profiles: ProfileSet) -> Dict[str, object]:
    tabulated = (profiles.A, profiles.B, profiles.Btilde)
    return {"Q": GroundStateProfile(k), **{p.name: CorrectionProfile(p, k) for p in tabulated}}


def two_bubble(k: int, r: np.ndarray, lam: float, mu: float) -> np.ndarray:
    """Q_lam - Q_mu, using pi - Q where both are close to pi."""
    near = ground_state(k, r / lam) - ground_state(k, r / mu)
    far = ground_state_complement(k, r / mu) - ground_state_complement(k, r / lam)
    return np.where(r < mu, near, far)


@dataclass(frozen=True, eq=False)
class Ansatz:
    """
    Phi = (Q_lam + b^2 A_lam + nu^k B_lam) - (Q_mu + a^2 A_mu + nu^k Btilde_mu)
    and Phi_dot, sampled on a grid. Both decay like r^k |log r| at 0 and
    like r^(2-k) at infinity.
    """
    state: ModState
    grid: RadialGrid
    k: int
    profiles: ProfileSet
    gamma: float
    gamma_mu: float
    sampler: _Sampler = field(repr=False)

    @cached_property
    def phi(self) -> RadialFn:
        vals = two_bubble(self.k, self.grid.r, self.state.lam, self.state.mu) \
            + self.correction_lam + self.correction_mu
        return RadialFn(self.grid, vals, float(self.k), True, float(2 - self.k))

    @cached_property
    def phidot(self) -> RadialFn:
        return RadialFn(self.grid, self.combine(PHIDOT_TERMS), float(self.k), True, float(2 - self.k))

    def gamma_for(self, term: Term) -> float:
        return self.gamma if term.scale == "lam" else self.gamma_mu

    def combine(self, terms: Iterable[Term], remap: Optional[Dict[str, str]] = None) -> np.ndarray:
        """Sum of the terms, each field optionally replaced through remap."""
        out = np.zeros(self.grid.n)
        for term in terms:
            which = remap[term.field] if remap else term.field
            c = term.coefficient(self.state, self.k, self.gamma_for(term))
            if c != 0.0:
                out += c * self.sampler(term.profile, which, term.scale, term.l2)
        return out

    @property
    def pair(self) -> PairFn:
        return PairFn(self.phi, self.phidot)

    @cached_property
    def correction_lam(self) -> np.ndarray:
        """b^2 A_lam + nu^k B_lam."""
        return self.combine(t for t in PHI_TERMS if t.scale == "lam" and t.profile != "Q")

    @cached_property
    def correction_mu(self) -> np.ndarray:
        """-(a^2 A_mu + nu^k Btilde_mu)."""
        return self.combine(t for t in PHI_TERMS if t.scale == "mu" and t.profile != "Q")

    @cached_property
    def lambda_phi(self) -> RadialFn:
        return self.phi.with_values(self.combine(PHI_TERMS, LAMBDA_OF))

    @cached_property
    def laplacian_phi(self) -> np.ndarray:
        return self.combine(PHI_TERMS, {"X": "LLX"}) / self.grid.r**2

    def energy(self) -> float:
        """E(Phi, Phi_dot) with the 2 pi of the energy convention."""
        r = self.grid.r
        dens = self.phidot.values**2 * r**2 + self.lambda_phi.values**2 \
            + self.k**2 * np.sin(self.phi.values) ** 2
        return math.pi * self.grid.integrate_dx(dens)


def assemble(
    state: ModState,
    grid: RadialGrid,
    k: int,
    profiles: Optional[ProfileSet] = None,
    nu_max: float = NU_MAX,
    gamma_mu: Optional[float] = None,
) -> Ansatz:
    if state.nu >= nu_max:
        raise error_from_code(
            CODE_BUBBLES_NOT_SEPARATED,
            f"scale ratio nu={state.nu:.4g} is not below {nu_max}",
        )
    profiles = profiles or build_profile_set(k)
    gamma = constants(k).gamma_k
    gamma_mu = gamma if gamma_mu is None else gamma_mu
    sampler = _Sampler(grid.r, state, _sources(k, profiles))
    logger.debug(f"assembling ansatz at lam={state.lam:.4g} mu={state.mu:.4g} a={state.a:.3g} b={state.b:.3g}")
    return Ansatz(state, grid, k, profiles, gamma, gamma_mu, sampler)


def time_derivative(ansatz: Ansatz, rates: ModRates, terms: Iterable[Term]) -> np.ndarray:
    """
    d/dt of a sum of terms along the parameter path: the coefficient rate
    plus the scale motion, d_t X_s = -(s'/s) (Lambda X)_s and
    d_t X_s_ = -(s'/s) (Lambda_0 X)_s_ for the L2 scaling.
    """
    s = ansatz.state
    out = np.zeros(ansatz.grid.n)
    for term in terms:
        g = ansatz.gamma_for(term)
        c = term.coefficient(s, ansatz.k, g)
        dc = term.rate(s, rates, ansatz.k, g)
        scale_rate = (rates.lam / s.lam) if term.scale == "lam" else (rates.mu / s.mu)
        if dc != 0.0:
            out += dc * ansatz.sampler(term.profile, term.field, term.scale, term.l2)
        if c != 0.0 and scale_rate != 0.0:
            moved = (LAMBDA0_OF if term.l2 else LAMBDA_OF)[term.field]
            out -= c * scale_rate * ansatz.sampler(term.profile, moved, term.scale, term.l2)
    return out


def _brackets(ansatz: Ansatz, rates: ModRates) -> Tuple[float, float, float, float]:
    """(b + lam', a - mu', b' + gamma nu^k / lam, a' + gamma~ nu^k / mu)."""
    s, k = ansatz.state, ansatz.k
    nu_k = s.nu**k
    return (
        s.b + rates.lam,
        s.a - rates.mu,
        rates.b + ansatz.gamma * nu_k / s.lam,
        rates.a + ansatz.gamma_mu * nu_k / s.mu,
    )


def psi1_from(ansatz: Ansatz, rates: ModRates) -> RadialFn:
    """Phi_dot - d_t Phi written through the four modulation brackets."""
    s, k = ansatz.state, ansatz.k
    a, b, lam, mu, nu = s.a, s.b, s.lam, s.mu, s.nu
    bl, am, bp, ap = _brackets(ansatz, rates)
    S = ansatz.sampler
    nu_k = nu**k
    vals = (
        bl * S("Q", "LX", "lam", True)
        + b * b * bl * S("A", "LX", "lam", True)
        - 2.0 * b * lam * bp * S("A", "X", "lam", True)
        + nu_k * bl * S("B", "LX", "lam", True)
        - k * nu_k * bl * S("B", "X", "lam", True)
        - k * nu_k * nu * am * S("B", "X", "lam", True)
        + am * S("Q", "LX", "mu", True)
        + a * a * am * S("A", "LX", "mu", True)
        + 2.0 * a * mu * ap * S("A", "X", "mu", True)
        + nu_k * am * S("Btilde", "LX", "mu", True)
        + k * nu ** (k - 1) * bl * S("Btilde", "X", "mu", True)
        + k * nu_k * am * S("Btilde", "X", "mu", True)
    )
    return ansatz.phidot.with_values(vals)


def psi1(
    state: ModState,
    rates: ModRates,
    grid: RadialGrid,
    k: int,
    profiles: Optional[ProfileSet] = None,
    gamma_mu: Optional[float] = None,
) -> RadialFn:
    return psi1_from(assemble(state, grid, k, profiles, gamma_mu=gamma_mu), rates)


@dataclass(frozen=True)
class NonlinearSplit:
    """
    f(Phi) - f(Q_lam) + f(Q_mu) - f'(Q_lam) T_lam - f'(Q_mu) T_mu
        = interaction + quadratic + cross
    with interaction = dipole_lam + dipole_mu + remainder.
    """
    interaction: np.ndarray
    dipole_lam: np.ndarray
    dipole_mu: np.ndarray
    remainder: np.ndarray
    quadratic: np.ndarray
    cross: np.ndarray


def nonlinear_split(ansatz: Ansatz) -> NonlinearSplit:
    k, s, r = ansatz.k, ansatz.state, ansatz.grid.r
    y_lam = k * np.log(r / s.lam)
    y_mu = k * np.log(r / s.mu)
    sech_lam, sech_mu = sech(y_lam), sech(y_mu)
    lq_lam, lq_mu = k * sech_lam, k * sech_mu
    sin2_lam = -2.0 * sech_lam * np.tanh(y_lam)
    sin2_mu = -2.0 * sech_mu * np.tanh(y_mu)
    cos2_lam = 1.0 - 2.0 * sech_lam**2
    cos2_mu = 1.0 - 2.0 * sech_mu**2

    interaction = lq_lam**2 * sin2_mu - lq_mu**2 * sin2_lam
    dipole_lam = 4.0 * np.exp(y_mu) * lq_lam**2
    dipole_mu = 4.0 * np.exp(-y_lam) * lq_mu**2
    # sin 2Q - 4 rho^k and -sin 2Q - 4 rho^-k in cancellation-free form
    rem_mu = -np.exp(y_mu) * (3.0 + np.exp(2.0 * y_mu)) * sech_mu**2
    rem_lam = -np.exp(-y_lam) * (3.0 + np.exp(-2.0 * y_lam)) * sech_lam**2
    remainder = lq_lam**2 * rem_mu + lq_mu**2 * rem_lam

    u = two_bubble(k, r, s.lam, s.mu)
    h = ansatz.correction_lam + ansatz.correction_mu
    quadratic = 0.5 * k**2 * (
        -2.0 * np.sin(2.0 * u) * np.sin(h) ** 2 + np.cos(2.0 * u) * (np.sin(2.0 * h) - 2.0 * h)
    )
    cos2u = np.cos(2.0 * u)
    cross = k**2 * ((cos2u - cos2_lam) * ansatz.correction_lam + (cos2u - cos2_mu) * ansatz.correction_mu)
    return NonlinearSplit(interaction, dipole_lam, dipole_mu, remainder, quadratic, cross)


def static_residual(ansatz: Ansatz) -> np.ndarray:
    """
    Delta Phi - f(Phi)/r^2 as the linearized images of the corrections minus
    the nonlinear split, free of the O(1) cancellation of the direct form.
    """
    k, s, r = ansatz.k, ansatz.state, ansatz.grid.r
    out = np.zeros(ansatz.grid.n)
    for scale, corr in (("lam", ansatz.correction_lam), ("mu", ansatz.correction_mu)):
        terms = [t for t in PHI_TERMS if t.scale == scale and t.profile != "Q"]
        lap = ansatz.combine(terms, {"X": "LLX"}) / r**2
        cos2 = 1.0 - 2.0 * sech(k * np.log(r / (s.lam if scale == "lam" else s.mu))) ** 2
        out += lap - k**2 * cos2 * corr / r**2
    split = nonlinear_split(ansatz)
    return out - (split.interaction + split.quadratic + split.cross) / r**2


def static_residual_direct(ansatz: Ansatz) -> np.ndarray:
    """Delta Phi - f(Phi)/r^2 evaluated term by term."""
    return ansatz.laplacian_phi - 0.5 * ansatz.k**2 * np.sin(2.0 * ansatz.phi.values) / ansatz.grid.r**2


def psi2_from(ansatz: Ansatz, rates: ModRates) -> RadialFn:
    vals = static_residual(ansatz) - time_derivative(ansatz, rates, PHIDOT_TERMS)
    return RadialFn(ansatz.grid, vals, float(ansatz.k - 2), True, float(-ansatz.k))


def psi2(
    state: ModState,
    rates: ModRates,
    grid: RadialGrid,
    k: int,
    profiles: Optional[ProfileSet] = None,
    gamma_mu: Optional[float] = None,
) -> RadialFn:
    return psi2_from(assemble(state, grid, k, profiles, gamma_mu=gamma_mu), rates)


def interaction_pairings(ansatz: Ansatz) -> Dict[str, float]:
    """Pairings of the r^-2 weighted nonlinear pieces with Lambda Q at both L2 scales."""
    grid, k, s = ansatz.grid, ansatz.k, ansatz.state
    split = nonlinear_split(ansatz)
    out: Dict[str, float] = {}
    for tag, scale in (("mu", s.mu), ("lam", s.lam)):
        lq = lambda_q_fn(grid, k, scale, l2=True)
        for name in ("remainder", "quadratic", "cross"):
            piece = RadialFn(grid, getattr(split, name) / grid.r**2)
            out[f"{name}.{tag}"] = abs(inner(lq, piece))
    return out


def export_csv(ansatz: Ansatz, path: Path, rates: Optional[ModRates] = None) -> Path:
    columns = {"r": ansatz.grid.r, "phi": ansatz.phi.values, "phidot": ansatz.phidot.values}
    if rates is not None:
        columns["psi1"] = psi1_from(ansatz, rates).values
        columns["psi2"] = psi2_from(ansatz, rates).values
    return write_columns(path, columns)


def alternate_gamma(grid: RadialGrid, k: int) -> float:
    """4 <r^(-k-2) (Lambda Q)^2 | Lambda Q> / ||Lambda Q||^2 by quadrature on the grid."""
    lq = lambda_q(k, grid.r)
    moment = grid.integrate(grid.r ** (-k - 2.0) * lq**3, float(2 * k - 2), False, float(-4 * k - 2))
    return 4.0 * moment / constants(k).kappa
