import json

import pytest

from bubblelab.cli import EXIT_NUMERICAL, EXIT_PASS, EXIT_USAGE, build_parser, main
from bubblelab.experiments.registry import ExperimentFactory


@pytest.fixture(autouse=True)
def log_to_tmp(tmp_path, monkeypatch):
    monkeypatch.setenv("BUBBLELAB_LOG", str(tmp_path / "logs" / "bubblelab.log"))
    monkeypatch.delenv("BUBBLELAB_OUT", raising=False)
    monkeypatch.delenv("BUBBLELAB_SEED", raising=False)


def test_parser():
    args = build_parser().parse_args(["ode", "--k", "5", "--seed", "7"])
    assert (args.experiment, args.k, args.seed) == ("ode", 5, 7)
    assert args.out is None and args.config is None


def test_list(capsys):
    assert main(["list"]) == EXIT_PASS
    out = capsys.readouterr().out
    for experiment_id in ExperimentFactory.list():
        assert experiment_id in out


def test_run_one(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text("[params]\nks = [4, 5]\n")
    code = main(["constants", "--config", str(config), "--out", str(tmp_path / "out"), "--seed", "3"])
    assert code == EXIT_PASS
    saved = json.loads((tmp_path / "out" / "constants" / "report.json").read_text())
    assert saved["seed"] == 3


def test_unknown_experiment(tmp_path):
    assert main(["nope", "--out", str(tmp_path)]) == EXIT_USAGE


def test_bad_k(tmp_path):
    assert main(["constants", "--k", "3", "--out", str(tmp_path)]) == EXIT_USAGE


def test_bad_config_file(tmp_path):
    assert main(["constants", "--config", str(tmp_path / "missing.toml")]) == EXIT_USAGE


def test_fatal_error_inside_a_run(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"params": {"ks": [3]}}))
    assert main(["constants", "--config", str(config), "--out", str(tmp_path)]) == EXIT_USAGE


def test_exit_codes_are_distinct():
    assert len({EXIT_PASS, EXIT_USAGE, EXIT_NUMERICAL}) == 3
