from .decompose import (
    Decomposition,
    ExtractorOptions,
    NewtonReport,
    cold_start,
    decompose,
    dominance_ratio,
    remainder_fn,
)
from .track import (
    DecompositionSeries,
    modulation_bounds,
    modulation_residuals,
    residual_monitor,
    track,
)

__all__ = [
    "Decomposition",
    "ExtractorOptions",
    "NewtonReport",
    "cold_start",
    "decompose",
    "dominance_ratio",
    "remainder_fn",
    "DecompositionSeries",
    "modulation_bounds",
    "modulation_residuals",
    "residual_monitor",
    "track",
]
