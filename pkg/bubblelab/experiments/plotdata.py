"""CSV plot data with log-log columns and fitted-line coefficients."""
import json
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from bubblelab.core.errors import CODE_INVALID_INPUT, NumericalError, error_from_code
from bubblelab.core.extractor.track import DecompositionSeries
from bubblelab.core.fitting import PowerFit, fit_power
from bubblelab.core.modulation.models import Trajectory
from bubblelab.core.modulation.system import analytic_approx
from bubblelab.core.profiles.pairings import envelope
from bubblelab.core.report import Claim, write_columns

logger = logging.getLogger(__name__)

Source = Union[Trajectory, DecompositionSeries, Claim]
Rows = Tuple[Dict[str, np.ndarray], Optional[PowerFit]]


def _trajectory(source: Source) -> Trajectory:
    if isinstance(source, DecompositionSeries):
        return source.trajectory()
    if isinstance(source, Trajectory):
        return source
    raise error_from_code(CODE_INVALID_INPUT, f"expected a trajectory, got {type(source).__name__}")


def _parameter(name: str) -> Callable[[Source, int], Rows]:
    def rows(source: Source, k: int) -> Rows:
        traj = _trajectory(source)
        values = getattr(traj, name)
        approx = np.array([getattr(analytic_approx(t, k), name) for t in traj.t])
        return (
            {"t": traj.t, name: values, f"{name}_app": approx, "ratio": values / approx},
            _fit(traj.t, values),
        )

    return rows


def _norms(source: Source, k: int) -> Rows:
    if not isinstance(source, DecompositionSeries):
        raise error_from_code(CODE_INVALID_INPUT, "norm plot data needs a decomposition series")
    t, lam = source.t, source.column("lam")
    wH = source.norm("wH")
    scale = lam ** ((3 * k - 2) / 2.0)
    return {"t": t, "wH": wH, "lam_power": scale, "ratio": wH / scale}, _fit(t, wH)


def _pairing(source: Source, k: int) -> Rows:
    if not isinstance(source, Claim) or "nus" not in source.details:
        raise error_from_code(CODE_INVALID_INPUT, "pairing plot data needs a pairing sweep claim")
    d = source.details
    nus = np.asarray(d["nus"])
    values = np.abs(np.asarray(d["values"]))
    if d.get("over_lambda"):
        values = values * nus
    bound = envelope(nus, d["exponent"])
    return {"nu": nus, "value": values, "bound": bound, "ratio": np.asarray(d["ratios"])}, _fit(nus, values)


def _fit(x: np.ndarray, y: np.ndarray) -> Optional[PowerFit]:
    try:
        return fit_power(x, y)
    except NumericalError:
        return None


PLOT_KINDS: Dict[str, Callable[[Source, int], Rows]] = {
    "lambda": _parameter("lam"),
    "b": _parameter("b"),
    "a": _parameter("a"),
    "norms": _norms,
    "pairing": _pairing,
}


def emit_plotdata(source: Source, kind: str, out_dir: Path, k: int, stem: Optional[str] = None) -> List[Path]:
    """
    Write <stem>.csv with the columns of `kind` and, when a power law fits,
    <stem>_fit.json with its exponent and prefactor.
    """
    emitter = PLOT_KINDS.get(kind)
    if emitter is None:
        raise error_from_code(CODE_INVALID_INPUT, f"unknown plot kind {kind!r}; known: {sorted(PLOT_KINDS)}")
    stem = stem or kind
    columns, fit = emitter(source, k)
    paths = [write_columns(out_dir / f"{stem}.csv", columns)]
    if fit is not None:
        path = out_dir / f"{stem}_fit.json"
        path.write_text(json.dumps({
            "exponent": fit.exponent,
            "prefactor": fit.prefactor,
            "residual": fit.residual,
            "n_points": fit.n_points,
        }, indent=2))
        paths.append(path)
    logger.debug(f"plot data {kind} -> {paths[0]}")
    return paths
