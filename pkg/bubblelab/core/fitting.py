"""Log-log regression helpers for rate and exponent checks."""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from bubblelab.core.errors import CODE_INSUFFICIENT_DATA, error_from_code


@dataclass
class PowerFit:
    """y ~ prefactor * x^exponent."""
    exponent: float
    prefactor: float
    residual: float
    n_points: int


def fit_power(x: np.ndarray, y: np.ndarray, min_points: int = 3) -> PowerFit:
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    mask = (x > 0) & (y > 0) & np.isfinite(y)
    if mask.sum() < min_points:
        raise error_from_code(
            CODE_INSUFFICIENT_DATA, f"power fit needs {min_points} positive samples, got {int(mask.sum())}"
        )
    lx, ly = np.log(x[mask]), np.log(y[mask])
    coef, res, *_ = np.polyfit(lx, ly, 1, full=True)
    residual = float(np.sqrt(res[0] / mask.sum())) if len(res) else 0.0
    return PowerFit(float(coef[0]), float(np.exp(coef[1])), residual, int(mask.sum()))


def fit_log_power(x: np.ndarray, y: np.ndarray, guess: float, window: float = 1.0) -> PowerFit:
    """
    Exponent p of y ~ x^p (alpha log x + beta): for each trial p the
    bracket is fitted linearly and p minimizes the pointwise relative
    misfit, so no single end of the window dominates.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lx = np.log(x)
    design = np.column_stack([lx, np.ones_like(lx)])

    def misfit(p: float) -> float:
        z = y / x**p
        weight = 1.0 / np.maximum(np.abs(z), 1e-12 * np.max(np.abs(z)))
        coef, *_ = np.linalg.lstsq(design * weight[:, None], z * weight, rcond=None)
        return float(np.linalg.norm((design @ coef - z) * weight) / np.sqrt(len(z)))

    res = minimize_scalar(misfit, bounds=(guess - window, guess + window), method="bounded",
                          options={"xatol": 1e-8})
    p = float(res.x)
    z = y / x**p
    coef, *_ = np.linalg.lstsq(design, z, rcond=None)
    return PowerFit(p, float(coef[0]), float(res.fun), len(x))


def log_slope(x: np.ndarray, ratio: np.ndarray) -> float:
    """Slope of log(ratio) against log(x)."""
    return fit_power(x, ratio, min_points=2).exponent


def noise_floor_mask(values: np.ndarray, floor: Optional[float]) -> np.ndarray:
    values = np.abs(np.asarray(values, dtype=float))
    if floor is None:
        return np.isfinite(values) & (values > 0)
    return np.isfinite(values) & (values > floor)
