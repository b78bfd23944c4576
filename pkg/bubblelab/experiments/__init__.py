from .base import Experiment, ExperimentContext, ExperimentResult
from .config import ExperimentConfig, GridConfig, load_config
from .registry import EXPERIMENT_REGISTRY, ExperimentFactory, run_experiment

__all__ = [
    "Experiment",
    "ExperimentContext",
    "ExperimentResult",
    "ExperimentConfig",
    "GridConfig",
    "load_config",
    "EXPERIMENT_REGISTRY",
    "ExperimentFactory",
    "run_experiment",
]
