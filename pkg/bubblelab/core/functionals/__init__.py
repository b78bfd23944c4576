"""Virial cutoff, truncated virial operators, coercivity and the energy-virial functionals."""
from .cutoff import CutoffP, CutoffProperty, build_cutoff
from .virial import (
    VirialOp,
    apply_A,
    apply_A0,
    boundedness,
    gaussian_battery,
    l0_a0_discrepancy,
    pohozaev_check,
    pohozaev_constants,
    replacement_errors,
)
from .coercivity import OPERATOR_IDS, CoercivitySetup, coercivity_rayleigh, coercivity_suite, rayleigh_min
from .energy_virial import (
    EnergyVirial,
    check_orthogonal,
    comparability,
    energy_virial,
    functional_E3,
    functional_H1,
    functional_H2,
    orthogonal_battery,
)

__all__ = [
    "CutoffP",
    "CutoffProperty",
    "build_cutoff",
    "VirialOp",
    "apply_A",
    "apply_A0",
    "boundedness",
    "gaussian_battery",
    "l0_a0_discrepancy",
    "pohozaev_check",
    "pohozaev_constants",
    "replacement_errors",
    "OPERATOR_IDS",
    "CoercivitySetup",
    "coercivity_rayleigh",
    "coercivity_suite",
    "rayleigh_min",
    "EnergyVirial",
    "check_orthogonal",
    "comparability",
    "energy_virial",
    "functional_E3",
    "functional_H1",
    "functional_H2",
    "orthogonal_battery",
]
