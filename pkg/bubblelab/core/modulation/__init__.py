from .models import ModRates, ModState, Trajectory
from .system import (
    T_ANCHOR,
    FormalBranch,
    analytic_approx,
    asymptotic_state,
    formal_branch,
    formal_state,
    hamiltonian,
    integrate,
    rhs,
    state_derivative,
)

__all__ = [
    "ModRates",
    "ModState",
    "Trajectory",
    "T_ANCHOR",
    "FormalBranch",
    "analytic_approx",
    "asymptotic_state",
    "formal_branch",
    "formal_state",
    "hamiltonian",
    "integrate",
    "rhs",
    "state_derivative",
]
