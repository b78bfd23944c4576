"""
Experiment configuration.

Layers, lowest first: model defaults, the config.toml presets
([defaults], [grid], [solver], [experiments.<id>]), a --config file
(TOML or JSON), BUBBLELAB_* environment variables, explicit CLI flags.
"""
import hashlib
import json
import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field, ValidationError

from bubblelab.core.errors import CODE_CONFIG_PARSE, error_from_code
from bubblelab.core.evolver.models import SolverConfig
from bubblelab.core.grid import RadialGrid

logger = logging.getLogger(__name__)

PRESETS_PATH = Path(__file__).parent.parent.parent / "config.toml"
DEFAULT_OUT = Path("out")


class GridConfig(BaseModel):
    r_min: float = Field(1e-6, gt=0.0)
    r_max: float = Field(1e3, gt=0.0)
    n: int = Field(4096, ge=16)

    def build(self) -> RadialGrid:
        return RadialGrid(self.r_min, self.r_max, self.n)


class ExperimentConfig(BaseModel):
    experiment_id: str
    k: int = Field(4, ge=4)
    grid: GridConfig = Field(default_factory=GridConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    t0: float = 20.0
    t_end: float = 80.0
    tolerances: Dict[str, float] = Field(default_factory=dict)
    seed: int = 0
    out_dir: Path = DEFAULT_OUT
    params: Dict[str, Any] = Field(default_factory=dict)

    def content_hash(self) -> str:
        """SHA-256 of the canonical JSON form; the output location is not part of the content."""
        payload = self.model_dump(mode="json", exclude={"out_dir"})
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))

    @property
    def run_dir(self) -> Path:
        return self.out_dir / self.experiment_id


def _merge(base: Dict[str, Any], extra: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def read_config_file(path: Path) -> Dict[str, Any]:
    """A TOML or JSON mapping; anything else is a config parse error."""
    if not path.exists():
        raise error_from_code(CODE_CONFIG_PARSE, f"config file {path} not found")
    try:
        if path.suffix == ".json":
            data = json.loads(path.read_text())
        else:
            with open(path, "rb") as f:
                data = tomllib.load(f)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise error_from_code(CODE_CONFIG_PARSE, f"cannot parse {path}: {e}") from e
    if not isinstance(data, dict):
        raise error_from_code(CODE_CONFIG_PARSE, f"{path} must hold a mapping at top level")
    return data


def preset_layer(experiment_id: str, presets: Optional[Path] = None) -> Dict[str, Any]:
    path = presets or PRESETS_PATH
    if not path.exists():
        logger.debug(f"no presets at {path}")
        return {}
    data = read_config_file(path)
    layer = dict(data.get("defaults", {}))
    for section in ("grid", "solver"):
        if section in data:
            layer[section] = data[section]
    return _merge(layer, data.get("experiments", {}).get(experiment_id, {}))


def env_layer() -> Dict[str, Any]:
    layer: Dict[str, Any] = {}
    if out := os.getenv("BUBBLELAB_OUT"):
        layer["out_dir"] = out
    if seed := os.getenv("BUBBLELAB_SEED"):
        try:
            layer["seed"] = int(seed)
        except ValueError as e:
            raise error_from_code(CODE_CONFIG_PARSE, f"BUBBLELAB_SEED must be an integer, got {seed!r}") from e
    return layer


def load_config(
    experiment_id: str,
    config_path: Optional[Path] = None,
    overrides: Optional[Dict[str, Any]] = None,
    presets: Optional[Path] = None,
) -> ExperimentConfig:
    data = preset_layer(experiment_id, presets)
    if config_path is not None:
        data = _merge(data, read_config_file(config_path))
    data = _merge(data, env_layer())
    data = _merge(data, {key: v for key, v in (overrides or {}).items() if v is not None})
    data["experiment_id"] = experiment_id
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise error_from_code(CODE_CONFIG_PARSE, f"invalid configuration for {experiment_id}: {e}") from e
    logger.debug(f"config for {experiment_id}: hash {config.content_hash()[:12]}")
    return config
