import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from bubblelab.core.grid import PairFn, RadialFn, RadialGrid

logger = logging.getLogger(__name__)


class Scheme(str, Enum):
    VERLET = "verlet"
    IMEX = "imex"


class SolverConfig(BaseModel):
    """Time-stepping policy for the radial wave-map evolution."""

    scheme: Scheme = Scheme.VERLET
    cfl: float = Field(0.5, gt=0.0, le=0.9)
    dt: Optional[float] = Field(None, gt=0.0)
    snapshot_interval: float = Field(1.0, gt=0.0)
    energy_every: int = Field(100, ge=1)
    blowup_threshold: float = Field(50.0, gt=0.0)


@dataclass(frozen=True, eq=False)
class FieldState:
    """The pair (u, u_t) at time t."""
    u: RadialFn
    ut: RadialFn
    t: float = 0.0

    def __post_init__(self):
        self.u.grid.check_same(self.ut.grid)

    @property
    def grid(self) -> RadialGrid:
        return self.u.grid

    @property
    def pair(self) -> PairFn:
        return PairFn(self.u, self.ut)

    @classmethod
    def from_pair(cls, pair: PairFn, t: float = 0.0) -> "FieldState":
        return cls(pair.pos, pair.vel, t)

    @classmethod
    def from_values(cls, grid: RadialGrid, u: np.ndarray, ut: np.ndarray, t: float, k: int) -> "FieldState":
        return cls(
            RadialFn(grid, u, float(k), False, None),
            RadialFn(grid, ut, float(k), False, None),
            float(t),
        )


@dataclass
class EvolveSeries:
    """Snapshots of an evolution, with its energy record."""
    states: List[FieldState]
    energy_t: np.ndarray
    energy: np.ndarray
    dt: float
    steps: int
    blew_up: bool = False
    meta: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def energy_drift(self) -> float:
        if len(self.energy) < 2:
            return 0.0
        drift = float(np.max(np.abs(self.energy - self.energy[0])))
        # zero data: absolute drift
        return drift / abs(self.energy[0]) if self.energy[0] != 0.0 else drift

    def save(self, out_dir: Path, config_hash: str = "") -> Path:
        """One .npz per snapshot plus manifest.json."""
        out_dir.mkdir(parents=True, exist_ok=True)
        files = []
        for i, s in enumerate(self.states):
            name = f"snapshot_{i:05d}.npz"
            np.savez(out_dir / name, r=s.grid.r, u=s.u.values, ut=s.ut.values, t=s.t)
            files.append(name)
        manifest = {
            "config_hash": config_hash,
            "t": [float(s.t) for s in self.states],
            "files": files,
            "dt": self.dt,
            "steps": self.steps,
            "blew_up": self.blew_up,
            "energy_drift": self.energy_drift,
            "grid": list(self.states[0].grid.key) if self.states else None,
            **self.meta,
        }
        path = out_dir / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2, default=str))
        logger.info(f"Saved {len(files)} snapshots to {out_dir}")
        return path


def load_series(out_dir: Path, k: int) -> List[FieldState]:
    manifest = json.loads((out_dir / "manifest.json").read_text())
    r_min, r_max, n = manifest["grid"]
    grid = RadialGrid(r_min, r_max, int(n))
    states = []
    for name in manifest["files"]:
        data = np.load(out_dir / name)
        states.append(FieldState.from_values(grid, data["u"], data["ut"], float(data["t"]), k))
    return states
