from .terms import PHI_TERMS, PHIDOT_TERMS, Term
from .assemble import (
    NU_MAX,
    Ansatz,
    NonlinearSplit,
    alternate_gamma,
    assemble,
    export_csv,
    interaction_pairings,
    nonlinear_split,
    psi1,
    psi1_from,
    psi2,
    psi2_from,
    static_residual,
    static_residual_direct,
    time_derivative,
    two_bubble,
)
from .distance import DistanceResult, SearchBox, distance_plus, distance_terms, minimize_distance

__all__ = [
    "PHI_TERMS",
    "PHIDOT_TERMS",
    "Term",
    "NU_MAX",
    "Ansatz",
    "NonlinearSplit",
    "alternate_gamma",
    "assemble",
    "export_csv",
    "interaction_pairings",
    "nonlinear_split",
    "psi1",
    "psi1_from",
    "psi2",
    "psi2_from",
    "static_residual",
    "static_residual_direct",
    "time_derivative",
    "two_bubble",
    "DistanceResult",
    "SearchBox",
    "distance_plus",
    "distance_terms",
    "minimize_distance",
]
