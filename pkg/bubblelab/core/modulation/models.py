from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from bubblelab.core.report import write_columns


class ModState(BaseModel):
    """Modulation parameters (mu, lam, a, b) at time t."""

    model_config = ConfigDict(frozen=True)

    t: float = 0.0
    mu: float
    lam: float
    a: float = 0.0
    b: float = 0.0

    @field_validator("mu", "lam")
    @classmethod
    def _positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError(f"scales must be positive, got {v}")
        return v

    @property
    def nu(self) -> float:
        return self.lam / self.mu

    def as_vector(self) -> np.ndarray:
        return np.array([self.mu, self.lam, self.a, self.b])

    @classmethod
    def from_vector(cls, t: float, y: np.ndarray) -> "ModState":
        return cls(t=float(t), mu=float(y[0]), lam=float(y[1]), a=float(y[2]), b=float(y[3]))

    def rescaled(self, s: float) -> "ModState":
        """State of the field u(r/s): scales multiply by s, a and b unchanged."""
        return self.model_copy(update={"mu": self.mu * s, "lam": self.lam * s})


@dataclass
class Trajectory:
    """Sampled solution of the modulation system; times strictly monotone."""
    t: np.ndarray
    mu: np.ndarray
    lam: np.ndarray
    a: np.ndarray
    b: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        dt = np.diff(self.t)
        if len(dt) and not (np.all(dt > 0) or np.all(dt < 0)):
            raise ValueError("trajectory times must be strictly monotone")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def nu(self) -> np.ndarray:
        return self.lam / self.mu

    def state(self, i: int) -> ModState:
        return ModState(t=float(self.t[i]), mu=float(self.mu[i]), lam=float(self.lam[i]),
                        a=float(self.a[i]), b=float(self.b[i]))

    @property
    def states(self) -> List[ModState]:
        return [self.state(i) for i in range(len(self))]

    def to_csv(self, path: Path) -> Path:
        return write_columns(path, {"t": self.t, "mu": self.mu, "lam": self.lam,
                                    "a": self.a, "b": self.b, "nu": self.nu})


@dataclass(frozen=True)
class ModRates:
    """Time derivatives (mu', lam', a', b') of a ModState."""
    mu: float
    lam: float
    a: float
    b: float

    def as_vector(self) -> np.ndarray:
        return np.array([self.mu, self.lam, self.a, self.b])
