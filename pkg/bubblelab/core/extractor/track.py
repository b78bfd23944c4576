"""Decomposition along a time series and the modulation residual monitors."""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from bubblelab.core.errors import CODE_INSUFFICIENT_DATA, NumericalError, error_from_code
from bubblelab.core.evolver.models import FieldState
from bubblelab.core.extractor.decompose import Decomposition, ExtractorOptions, decompose
from bubblelab.core.fitting import fit_power
from bubblelab.core.modulation.models import ModState, Trajectory
from bubblelab.core.profiles.ground_state import constants
from bubblelab.core.profiles.profile_set import ProfileSet, build_profile_set
from bubblelab.core.report import Convention, Provenance, Report, write_columns

logger = logging.getLogger(__name__)

MIN_SAMPLES = 20
BOUND_C = 1e3


@dataclass
class DecompositionSeries:
    decompositions: List[Decomposition]
    meta: Dict[str, object] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.decompositions)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(d.state, name) for d in self.decompositions])

    @property
    def t(self) -> np.ndarray:
        return self.column("t")

    def norm(self, name: str) -> np.ndarray:
        return np.array([d.norms[name] for d in self.decompositions])

    def trajectory(self) -> Trajectory:
        return Trajectory(self.t, self.column("mu"), self.column("lam"), self.column("a"), self.column("b"),
                          meta=dict(self.meta))

    def rates(self) -> Dict[str, np.ndarray]:
        """Centered differences in t (one-sided at the ends)."""
        t = self.t
        return {name: np.gradient(self.column(name), t) for name in ("mu", "lam", "a", "b")}

    def to_csv(self, path: Path) -> Path:
        lam, mu = self.column("lam"), self.column("mu")
        return write_columns(path, {
            "t": self.t,
            "mu": mu,
            "lam": lam,
            "a": self.column("a"),
            "b": self.column("b"),
            "nu": lam / mu,
            "wH": self.norm("wH"),
            "wdotL2": self.norm("wdotL2"),
            "wH2": self.norm("wH2"),
            "wLamInvH": self.norm("wLamInvH"),
            "newton_iters": [d.newton.iterations for d in self.decompositions],
        })


def track(
    fields: Sequence[FieldState],
    k: int,
    guess: Optional[ModState] = None,
    options: Optional[ExtractorOptions] = None,
    profiles: Optional[ProfileSet] = None,
) -> DecompositionSeries:
    """Decompose each field in turn, warm-started from the previous result."""
    profiles = profiles or build_profile_set(k)
    out: List[Decomposition] = []
    current = guess
    for f in fields:
        if current is not None:
            current = current.model_copy(update={"t": f.t})
        try:
            d = decompose(f, k, current, options, profiles)
        except NumericalError as e:
            logger.error(f"decomposition failed at t={f.t:.6g}: {e.message}")
            raise error_from_code(e.code, f"tracking stopped at t={f.t:.6g}: {e.message}") from e
        out.append(d)
        current = d.state
    logger.info(f"Tracked {len(out)} fields")
    return DecompositionSeries(out)


@dataclass(frozen=True)
class MonitorSeries:
    name: str
    t: np.ndarray
    values: np.ndarray
    exponent: float
    floor: np.ndarray


def _noise_floor(x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """
    Largest of truncation error, roundoff and sample jitter in a centered
    difference, times ten. The jitter of x is read off its fourth
    differences, whose mean square is 70 sigma^2 for white noise.
    """
    dt = np.gradient(t)
    third = np.gradient(np.gradient(np.gradient(x, t), t), t)
    truncation = np.abs(dt) ** 2 / 6.0 * np.abs(third)
    jitter = float(np.sqrt(np.mean(np.diff(x, 4) ** 2) / 70.0)) if len(x) > 4 else 0.0
    roundoff = np.maximum(np.finfo(float).eps * np.abs(x), jitter) / np.abs(dt)
    return 10.0 * np.maximum(truncation, roundoff)


def modulation_residuals(series: DecompositionSeries, k: int) -> List[MonitorSeries]:
    """|lam' + b|, |mu' - a|, |b' + gamma nu^k / lam|, |a' + gamma nu^k / mu| with their stated decay."""
    gamma = constants(k).gamma_k
    beta = 2.0 / (k - 2)
    t = series.t
    d = series.rates()
    mu, lam, a, b = (series.column(n) for n in ("mu", "lam", "a", "b"))
    nu = lam / mu
    floors = {n: _noise_floor(series.column(n), t) for n in ("mu", "lam", "a", "b")}
    return [
        MonitorSeries("lam'+b", t, np.abs(d["lam"] + b), -beta * (2 * k - 1), floors["lam"]),
        MonitorSeries("mu'-a", t, np.abs(d["mu"] - a), -beta * (2 * k - 1), floors["mu"]),
        MonitorSeries("b'+gamma nu^k/lam", t, np.abs(d["b"] + gamma * nu**k / lam), -beta * (2 * k - 2),
                      floors["b"]),
        MonitorSeries("a'+gamma nu^k/mu", t, np.abs(d["a"] + gamma * nu**k / mu), -beta * (2 * k - 2),
                      floors["a"]),
    ]


def modulation_bounds(
    series: DecompositionSeries, k: int, floors: Optional[Dict[str, np.ndarray]] = None
) -> Dict[str, np.ndarray]:
    """
    Ratios of the residuals to the right sides of the parameter-derivative
    bounds. With floors given, each residual is first reduced by its
    difference-quotient noise floor.
    """
    d = series.rates()
    gamma = constants(k).gamma_k
    mu, lam, a, b = (series.column(n) for n in ("mu", "lam", "a", "b"))
    nu = lam / mu
    wH = series.norm("wH")
    wdot = series.norm("wdotL2")
    ab = np.abs(a) + np.abs(b)
    ab5 = np.abs(a) ** 5 + np.abs(b) ** 5
    bounds = {
        "mu'-a": (np.abs(d["mu"] - a), ab * wH + ab * nu ** (2 * k) + ab5 * nu ** (k - 2)),
        "lam'+b": (np.abs(d["lam"] + b), ab * wH + ab * nu ** (2 * k - 1) + ab5 * nu ** (k - 2)),
        "a'+gamma nu^k/mu": (
            np.abs(d["a"] + gamma * nu**k / mu),
            ab * nu / lam * wdot + nu / lam * wH**2 + nu ** (2 * k - 1) / lam + b**2 * nu ** (k - 1) / lam
            + b**4 * nu / lam + a**4 * nu / lam,
        ),
        "b'+gamma nu^k/lam": (
            np.abs(d["b"] + gamma * nu**k / lam),
            ab / lam * wdot + wH**2 / lam + nu ** (2 * k) * (1.0 + np.abs(np.log(nu))) / lam
            + b**4 / lam + a**4 / lam,
        ),
    }
    floors = floors or {}
    return {
        name: np.maximum(value - floors.get(name, 0.0), 0.0) / np.maximum(bound, 1e-300)
        for name, (value, bound) in bounds.items()
    }


def residual_monitor(
    series: DecompositionSeries, k: int, slack: float = 0.15, bound_c: float = BOUND_C
) -> Report:
    """
    Fit the decay exponent of each modulation residual against t, using
    only samples above the difference-quotient noise floor. A residual that
    never rises above the floor passes without a fit. The residuals over
    the right sides of their derivative bounds must stay below bound_c.
    """
    if len(series) < MIN_SAMPLES:
        raise error_from_code(
            CODE_INSUFFICIENT_DATA, f"residual monitor needs {MIN_SAMPLES} samples, got {len(series)}"
        )
    report = Report(experiment_id="residual-monitor")
    residuals = modulation_residuals(series, k)
    for m in residuals:
        mask = m.values > m.floor
        bound = m.exponent + slack * abs(m.exponent)
        if mask.sum() < 3:
            report.check_below(
                f"exponent {m.name}", m.exponent, bound, provenance=Provenance.LITERATURE,
                anchor="modulation rates", below_noise_floor=True,
                max_value=float(np.max(m.values)),
            )
            continue
        fit = fit_power(m.t[mask], m.values[mask])
        report.check_below(
            f"exponent {m.name}", fit.exponent, bound, provenance=Provenance.LITERATURE,
            anchor="modulation rates", convention=Convention.NONE,
            stated=m.exponent, prefactor=fit.prefactor, n_points=fit.n_points,
            below_noise_floor=False,
        )
    floors = {m.name: m.floor for m in residuals}
    for name, ratio in modulation_bounds(series, k, floors).items():
        # one-sided differences at the ends
        report.check_below(
            f"bound ratio {name}", float(np.max(ratio[1:-1])), bound_c, provenance=Provenance.LITERATURE,
            anchor="modulation derivative bounds",
        )
    return report
