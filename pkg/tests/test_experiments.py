import json
from dataclasses import dataclass

import numpy as np
import pytest

from bubblelab.core.errors import CODE_FIELD_BLOW_UP, CODE_UNKNOWN_EXPERIMENT, FatalError, error_from_code
from bubblelab.core.modulation import formal_branch
from bubblelab.experiments.base import Experiment, ExperimentContext, ExperimentResult
from bubblelab.experiments.config import ExperimentConfig, load_config
from bubblelab.experiments.constants import ConstantsExperiment
from bubblelab.experiments.plotdata import emit_plotdata
from bubblelab.experiments.registry import EXPERIMENT_REGISTRY, ExperimentFactory, run_experiment

ALL_IDS = [
    "constants",
    "profiles",
    "pairings",
    "ode",
    "ansatz-residual",
    "extractor-roundtrip",
    "coercivity",
    "virial",
    "evolve-2bubble",
]

FAST_CONSTANTS = {"ks": [4, 5]}


def test_registry_lists_every_experiment():
    assert ExperimentFactory.list() == ALL_IDS
    for experiment_id, cls in EXPERIMENT_REGISTRY.items():
        assert cls.experiment_id == experiment_id


def test_factory_converts_params():
    experiment = ExperimentFactory.create("constants", {"ks": [4, 6], "dps": 30.0, "bogus": 1})
    assert isinstance(experiment, ConstantsExperiment)
    assert experiment.ks == (4, 6)
    assert experiment.dps == 30
    assert experiment.grid.n == experiment.n


def test_unknown_experiment():
    with pytest.raises(FatalError) as e:
        ExperimentFactory.create("nope")
    assert e.value.code == CODE_UNKNOWN_EXPERIMENT


def test_schema():
    schema = ExperimentFactory.get_schema("constants")
    names = [f["name"] for f in schema["fields"]]
    assert names == ["ks", "dps", "n", "r_min", "r_max"]
    assert schema["fields"][1]["default"] == 40
    assert ExperimentFactory.get_schema("nope") is None


def test_run_constants(tmp_path):
    config = ExperimentConfig(experiment_id="constants", out_dir=tmp_path, params=FAST_CONSTANTS)
    result = run_experiment("constants", config)
    assert result.error is None
    assert result.passed, [c.name for c in result.report.failed_claims()]

    path = tmp_path / "constants" / "report.json"
    assert path in result.artifacts
    saved = json.loads(path.read_text())
    assert saved["experiment_id"] == "constants"
    assert saved["config_hash"] == config.content_hash()
    assert saved["seed"] == 0


def test_failed_run_still_writes_report(tmp_path):
    config = ExperimentConfig(experiment_id="constants", out_dir=tmp_path, params={"ks": [3]})
    result = run_experiment("constants", config)
    assert isinstance(result.error, FatalError)
    assert not result.passed
    saved = json.loads((tmp_path / "constants" / "report.json").read_text())
    assert str(result.error) in saved["notes"]


@dataclass
class HalfwayExperiment(Experiment):
    experiment_id = "constants"

    def description(self) -> str:
        return "records one claim, then blows up"

    def run(self, context: ExperimentContext) -> ExperimentResult:
        report = context.new_report()
        report.check_below("first stage", 0.5, 1.0, anchor="blow-up rate")
        raise error_from_code(CODE_FIELD_BLOW_UP, "field left the grid")


def test_failed_run_keeps_claims_made_before_the_error(tmp_path, monkeypatch):
    monkeypatch.setitem(EXPERIMENT_REGISTRY, "constants", HalfwayExperiment)
    config = ExperimentConfig(experiment_id="constants", out_dir=tmp_path)
    result = run_experiment("constants", config)
    assert result.error is not None and result.error.code == CODE_FIELD_BLOW_UP
    assert [c.name for c in result.report.claims] == ["first stage"]
    saved = json.loads((tmp_path / "constants" / "report.json").read_text())
    assert [c["name"] for c in saved["claims"]] == ["first stage"]
    assert "field left the grid" in " ".join(saved["notes"])


@pytest.mark.slow
@pytest.mark.parametrize("experiment_id", ALL_IDS[1:])
def test_experiment_passes(experiment_id, tmp_path):
    config = load_config(experiment_id, overrides={"out_dir": tmp_path})
    result = run_experiment(experiment_id, config)
    assert result.error is None, result.error
    assert result.passed, [c.name for c in result.report.failed_claims()]


def test_plotdata_from_formal_branch(tmp_path):
    branch = formal_branch(np.geomspace(1e3, 1e5, 20), 4)
    csv_path, fit_path = emit_plotdata(branch.trajectory, "lambda", tmp_path, 4, "branch_lambda")
    assert csv_path.read_text().splitlines()[0] == "t,lam,lam_app,ratio"
    assert json.loads(fit_path.read_text())["exponent"] == pytest.approx(-1.0, abs=0.05)


def test_plotdata_rejects_wrong_source(tmp_path):
    branch = formal_branch(np.geomspace(1e3, 1e4, 5), 4)
    with pytest.raises(FatalError):
        emit_plotdata(branch.trajectory, "norms", tmp_path, 4)
    with pytest.raises(FatalError):
        emit_plotdata(branch.trajectory, "nope", tmp_path, 4)


REDUCED = {
    "profiles": {},
    "ode": {"params": {"n_times": 20}},
    "virial": {"params": {"n_battery": 6, "lams": [0.1, 1.0]}},
    "pairings": {"params": {"pair_ids": [
        "scaled.LQl.LQm", "scaled.L0LQm.LAl", "scaled.L0LQm.Bl", "pair.LQm.Al2",
        "pair.LQm.Bl2", "pair.LQmBtm.LQl2", "l2.LQlLQmBtm", "l21.LQmBl2",
    ]}},
}


@pytest.mark.parametrize("experiment_id", sorted(REDUCED))
def test_reduced_experiment_passes(experiment_id, tmp_path):
    config = load_config(experiment_id, overrides={"out_dir": tmp_path, **REDUCED[experiment_id]})
    result = run_experiment(experiment_id, config)
    assert result.error is None, result.error
    assert result.passed, [c.name for c in result.report.failed_claims()]


def test_ode_deviation_exponent(tmp_path):
    config = load_config("ode", overrides={"out_dir": tmp_path, "params": {"n_times": 20}})
    result = run_experiment("ode", config)
    claim = next(c for c in result.report.claims if c.name == "relative deviation from lam~ exponent in t")
    assert claim.passed
    assert claim.measured == pytest.approx(-2.0, abs=0.2)


def test_short_evolve_run_keeps_its_rates(tmp_path):
    overrides = {
        "out_dir": tmp_path,
        "t_end": 26.0,
        "grid": {"r_min": 1e-4, "r_max": 1e2, "n": 2048},
        "solver": {"scheme": "imex", "dt": 1e-3, "snapshot_interval": 1.0},
    }
    config = load_config("evolve-2bubble", overrides=overrides)
    result = run_experiment("evolve-2bubble", config)
    assert result.error is None, result.error
    names = {c.name: c for c in result.report.claims}
    for name in ("lam(t) exponent", "lam(t) t^beta -> q_k"):
        assert names[name].passed, names[name]
    assert any(name.startswith("H1 monitor") for name in names)
