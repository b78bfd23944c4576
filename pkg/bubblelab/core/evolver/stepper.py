"""Symmetric time steppers and the evolution driver."""
import logging
import math
import time
from abc import ABC, abstractmethod
from typing import Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from bubblelab.core.errors import CODE_INVALID_INPUT, error_from_code
from bubblelab.core.evolver.field import WaveOperator, operator_for
from bubblelab.core.evolver.models import EvolveSeries, FieldState, Scheme, SolverConfig

logger = logging.getLogger(__name__)

Arrays = Tuple[np.ndarray, np.ndarray]


class Stepper(ABC):
    """One time step (u, v) -> (u, v) of size dt for a fixed operator."""

    def __init__(self, op: WaveOperator, dt: float):
        self.op = op
        self.dt = dt

    @abstractmethod
    def __call__(self, u: np.ndarray, v: np.ndarray) -> Arrays:
        pass


class VerletStepper(Stepper):
    """Kick-drift-kick Stoermer-Verlet on the full right side."""

    def __call__(self, u: np.ndarray, v: np.ndarray) -> Arrays:
        dt = self.dt
        v = v + 0.5 * dt * self.op.acceleration(u)
        u = u + dt * v
        v = v + 0.5 * dt * self.op.acceleration(u)
        return u, v


class ImexStepper(Stepper):
    """
    Strang splitting: half kick with N, Crank-Nicolson on u'' = M u + c,
    half kick with N. The implicit matrix is factored once.
    """

    def __init__(self, op: WaveOperator, dt: float):
        super().__init__(op, dt)
        n = op.grid.n
        quarter = 0.25 * dt * dt * op.matrix
        eye = sparse.identity(n, format="csc")
        self._lu = splu(sparse.csc_matrix(eye - quarter))
        self._explicit = sparse.csr_matrix(eye + quarter)
        self._shift = 0.5 * dt * dt * op.affine

    def __call__(self, u: np.ndarray, v: np.ndarray) -> Arrays:
        dt = self.dt
        v = v + 0.5 * dt * self.op.nonlinear(u)
        u_new = self._lu.solve(self._explicit @ u + dt * v + self._shift)
        v = 2.0 * (u_new - u) / dt - v
        v = v + 0.5 * dt * self.op.nonlinear(u_new)
        return u_new, v


STEPPERS = {Scheme.VERLET: VerletStepper, Scheme.IMEX: ImexStepper}


def max_step(op: WaveOperator, config: SolverConfig) -> float:
    if config.scheme is Scheme.IMEX:
        if config.dt is None:
            raise error_from_code(CODE_INVALID_INPUT, "the imex scheme needs an explicit dt")
        return config.dt
    explicit = config.cfl * op.stable_step()
    return min(explicit, config.dt) if config.dt is not None else explicit


def step(state: FieldState, dt: float, k: int, scheme: Scheme = Scheme.VERLET) -> FieldState:
    """A single step; dt may be negative."""
    op = operator_for(state, k)
    u, v = STEPPERS[scheme](op, dt)(state.u.values, state.ut.values)
    return FieldState(state.u.with_values(u), state.ut.with_values(v), state.t + dt)


def evolve(
    s0: FieldState,
    t_end: float,
    k: int,
    config: Optional[SolverConfig] = None,
) -> EvolveSeries:
    """
    Evolve from s0 to t_end (either direction) with equal steps no larger
    than the scheme's limit. Snapshots are kept every snapshot_interval and
    the energy every energy_every steps. A sup norm above the blow-up
    threshold ends the run early with blew_up set.
    """
    config = config or SolverConfig()
    op = operator_for(s0, k)
    span = t_end - s0.t
    dt_max = max_step(op, config)
    n_steps = max(int(math.ceil(abs(span) / dt_max)), 1)
    dt = span / n_steps
    stepper = STEPPERS[config.scheme](op, dt)
    every = max(int(round(config.snapshot_interval / abs(dt))), 1)
    logger.info(
        f"Evolving {config.scheme.value} from t={s0.t:g} to t={t_end:g}: "
        f"{n_steps} steps of dt={dt:.3e} on {s0.grid.n} nodes"
    )

    u, v = s0.u.values.copy(), s0.ut.values.copy()
    states = [s0]
    energy_t, energies = [s0.t], [op.energy(u, v)]
    blew_up = False
    started = time.perf_counter()
    for i in range(1, n_steps + 1):
        u, v = stepper(u, v)
        t = s0.t + i * dt
        sup = np.max(np.abs(u))
        if not np.isfinite(sup) or sup > config.blowup_threshold:
            logger.warning(f"sup|u| = {sup:.3g} above threshold at t={t:.6g}; stopping")
            blew_up = True
            break
        if i % config.energy_every == 0 or i == n_steps:
            energy_t.append(t)
            energies.append(op.energy(u, v))
        if i % every == 0 or i == n_steps:
            states.append(FieldState(s0.u.with_values(u), s0.ut.with_values(v), t))
    elapsed = time.perf_counter() - started

    series = EvolveSeries(
        states=states,
        energy_t=np.array(energy_t),
        energy=np.array(energies),
        dt=dt,
        steps=i,
        blew_up=blew_up,
        meta={"scheme": config.scheme.value, "dt_max": dt_max, "wall_time": elapsed},
    )
    logger.info(f"Evolution done in {elapsed:.1f}s, energy drift {series.energy_drift:.2e}")
    return series
