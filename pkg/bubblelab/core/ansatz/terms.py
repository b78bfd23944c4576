"""Summand tables for the two-bubble ansatz Phi and its velocity Phi_dot."""
from dataclasses import dataclass
from typing import Tuple

from bubblelab.core.modulation.models import ModRates, ModState

PROFILES = ("Q", "A", "B", "Btilde")
SCALES = ("lam", "mu")


@dataclass(frozen=True)
class Term:
    """
    One summand  coef * k^k_pow * gamma^gamma_pow * a^a_pow * b^b_pow * nu^(m k + n) * X_s

    where X is a field ("X" or "LX" = Lambda X) of a profile at scale s.
    With l2 the summand uses the L2 scaling s^-1 X(r/s), otherwise X(r/s).
    """
    name: str
    coef: float
    profile: str
    field: str
    scale: str
    l2: bool
    a_pow: int = 0
    b_pow: int = 0
    nu_pow: Tuple[int, int] = (0, 0)
    k_pow: int = 0
    gamma_pow: int = 0

    def __post_init__(self):
        if self.profile not in PROFILES or self.scale not in SCALES or self.field not in ("X", "LX"):
            raise ValueError(f"malformed term {self.name}")

    def nu_exponent(self, k: int) -> int:
        m, n = self.nu_pow
        return m * k + n

    def _constant(self, k: int, gamma: float) -> float:
        return self.coef * float(k) ** self.k_pow * gamma**self.gamma_pow

    def coefficient(self, s: ModState, k: int, gamma: float) -> float:
        p = self.nu_exponent(k)
        return self._constant(k, gamma) * s.a**self.a_pow * s.b**self.b_pow * s.nu**p

    def rate(self, s: ModState, d: ModRates, k: int, gamma: float) -> float:
        """Time derivative of the coefficient, with nu' = (lam' - nu mu') / mu."""
        p = self.nu_exponent(k)
        a, b, nu = s.a, s.b, s.nu
        nu_rate = (d.lam - nu * d.mu) / s.mu
        total = 0.0
        if self.a_pow:
            total += self.a_pow * a ** (self.a_pow - 1) * d.a * b**self.b_pow * nu**p
        if self.b_pow:
            total += self.b_pow * b ** (self.b_pow - 1) * d.b * a**self.a_pow * nu**p
        if p:
            total += p * nu ** (p - 1) * nu_rate * a**self.a_pow * b**self.b_pow
        return self._constant(k, gamma) * total


PHI_TERMS: Tuple[Term, ...] = (
    Term("Q_lam", 1.0, "Q", "X", "lam", False),
    Term("b^2 A_lam", 1.0, "A", "X", "lam", False, b_pow=2),
    Term("nu^k B_lam", 1.0, "B", "X", "lam", False, nu_pow=(1, 0)),
    Term("Q_mu", -1.0, "Q", "X", "mu", False),
    Term("a^2 A_mu", -1.0, "A", "X", "mu", False, a_pow=2),
    Term("nu^k Btilde_mu", -1.0, "Btilde", "X", "mu", False, nu_pow=(1, 0)),
)

PHIDOT_TERMS: Tuple[Term, ...] = (
    Term("b LQ_lam", 1.0, "Q", "LX", "lam", True, b_pow=1),
    Term("b^3 LA_lam", 1.0, "A", "LX", "lam", True, b_pow=3),
    Term("-2 gamma b nu^k A_lam", -2.0, "A", "X", "lam", True, b_pow=1, nu_pow=(1, 0), gamma_pow=1),
    Term("b nu^k LB_lam", 1.0, "B", "LX", "lam", True, b_pow=1, nu_pow=(1, 0)),
    Term("-k b nu^k B_lam", -1.0, "B", "X", "lam", True, b_pow=1, nu_pow=(1, 0), k_pow=1),
    Term("-k a nu^(k+1) B_lam", -1.0, "B", "X", "lam", True, a_pow=1, nu_pow=(1, 1), k_pow=1),
    Term("a LQ_mu", 1.0, "Q", "LX", "mu", True, a_pow=1),
    Term("a^3 LA_mu", 1.0, "A", "LX", "mu", True, a_pow=3),
    Term("2 gamma a nu^k A_mu", 2.0, "A", "X", "mu", True, a_pow=1, nu_pow=(1, 0), gamma_pow=1),
    Term("a nu^k LBtilde_mu", 1.0, "Btilde", "LX", "mu", True, a_pow=1, nu_pow=(1, 0)),
    Term("k b nu^(k-1) Btilde_mu", 1.0, "Btilde", "X", "mu", True, b_pow=1, nu_pow=(1, -1), k_pow=1),
    Term("k a nu^k Btilde_mu", 1.0, "Btilde", "X", "mu", True, a_pow=1, nu_pow=(1, 0), k_pow=1),
)
