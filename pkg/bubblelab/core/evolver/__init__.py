from .models import EvolveSeries, FieldState, Scheme, SolverConfig, load_series
from .field import WaveOperator, energy, operator_for, rhs_field
from .stepper import ImexStepper, Stepper, VerletStepper, evolve, max_step, step

__all__ = [
    "EvolveSeries",
    "FieldState",
    "Scheme",
    "SolverConfig",
    "load_series",
    "WaveOperator",
    "energy",
    "operator_for",
    "rhs_field",
    "ImexStepper",
    "Stepper",
    "VerletStepper",
    "evolve",
    "max_step",
    "step",
]
