from .ground_state import (
    Constants,
    constants,
    constants_oracle,
    ground_state,
    lambda0_lambda_q,
    lambda_q,
)
from .linearized import cutoff_le1, project_out_kernel, solve_linearized
from .profile_set import Profile, ProfileSet, build_profile_set
from .pairings import PAIRING_REGISTRY, pairing_sweep, sweep_pairing

__all__ = [
    "Constants",
    "constants",
    "constants_oracle",
    "ground_state",
    "lambda0_lambda_q",
    "lambda_q",
    "cutoff_le1",
    "project_out_kernel",
    "solve_linearized",
    "Profile",
    "ProfileSet",
    "build_profile_set",
    "PAIRING_REGISTRY",
    "pairing_sweep",
    "sweep_pairing",
]
