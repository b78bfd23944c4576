import logging
import time
from dataclasses import MISSING, fields
from typing import Any, Dict, List, Optional, Type

from bubblelab.core.errors import CODE_UNKNOWN_EXPERIMENT, NumericalError, error_from_code
from bubblelab.core.report import Report
from bubblelab.experiments.ansatz_residual import AnsatzResidualExperiment
from bubblelab.experiments.base import Experiment, ExperimentContext, ExperimentResult
from bubblelab.experiments.coercivity import CoercivityExperiment
from bubblelab.experiments.config import ExperimentConfig
from bubblelab.experiments.constants import ConstantsExperiment
from bubblelab.experiments.evolve import EvolveExperiment
from bubblelab.experiments.extractor_roundtrip import ExtractorRoundtripExperiment
from bubblelab.experiments.ode import OdeExperiment
from bubblelab.experiments.pairings import PairingsExperiment
from bubblelab.experiments.profiles import ProfilesExperiment
from bubblelab.experiments.virial import VirialExperiment

logger = logging.getLogger(__name__)

EXPERIMENT_REGISTRY: Dict[str, Type[Experiment]] = {
    cls.experiment_id: cls
    for cls in (
        ConstantsExperiment,
        ProfilesExperiment,
        PairingsExperiment,
        OdeExperiment,
        AnsatzResidualExperiment,
        ExtractorRoundtripExperiment,
        CoercivityExperiment,
        VirialExperiment,
        EvolveExperiment,
    )
}


class ExperimentFactory:
    """Creates experiment instances from the params section of a config."""

    @staticmethod
    def create(experiment_id: str, params: Optional[Dict[str, Any]] = None) -> Experiment:
        experiment_class = EXPERIMENT_REGISTRY.get(experiment_id)
        if not experiment_class:
            raise error_from_code(
                CODE_UNKNOWN_EXPERIMENT,
                f"unknown experiment {experiment_id!r}; known: {ExperimentFactory.list()}",
            )
        parsed = ExperimentFactory._parse_params(experiment_class, params or {})
        try:
            return experiment_class(**parsed)
        except (TypeError, ValueError) as e:
            raise error_from_code(CODE_UNKNOWN_EXPERIMENT, f"cannot create {experiment_id}: {e}") from e

    @staticmethod
    def _parse_params(experiment_class: Type[Experiment], params: Dict[str, Any]) -> Dict[str, Any]:
        parsed = {}
        known = {f.name: f for f in fields(experiment_class) if f.init}
        for key, value in params.items():
            if key not in known:
                logger.warning(f"{experiment_class.experiment_id}: ignoring unknown parameter {key!r}")
                continue
            field_type = known[key].type
            # TOML and JSON give lists; tuple fields stay hashable
            if isinstance(value, list):
                parsed[key] = tuple(tuple(v) if isinstance(v, list) else v for v in value)
            elif field_type is float:
                parsed[key] = float(value)
            elif field_type is int:
                parsed[key] = int(value)
            else:
                parsed[key] = value
        return parsed

    @staticmethod
    def get_schema(experiment_id: str) -> Optional[Dict[str, Any]]:
        experiment_class = EXPERIMENT_REGISTRY.get(experiment_id)
        if not experiment_class:
            return None
        schema: Dict[str, Any] = {"experiment_id": experiment_id, "fields": []}
        for f in fields(experiment_class):
            if not f.init:
                continue
            info: Dict[str, Any] = {"name": f.name, "type": str(f.type)}
            if f.default is not MISSING:
                info["default"] = f.default
            schema["fields"].append(info)
        return schema

    @staticmethod
    def list() -> List[str]:
        return list(EXPERIMENT_REGISTRY.keys())


def run_experiment(experiment_id: str, config: ExperimentConfig) -> ExperimentResult:
    """
    Run one experiment and persist its report under config.run_dir.

    Module-level so a process pool can pickle it. A NumericalError raised
    by the pipeline is logged, attached to the result and the partial
    report is still written.
    """
    started = time.perf_counter()
    out_dir = config.run_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    experiment = ExperimentFactory.create(experiment_id, config.params)
    context = ExperimentContext(config=config, out_dir=out_dir, logger=logging.getLogger(f"bubblelab.{experiment_id}"))
    logger.info(f"Running {experiment_id} (k={config.k}, hash {config.content_hash()[:12]}): {experiment.description()}")
    try:
        result = experiment.run(context)
    except NumericalError as e:
        logger.error(f"{experiment_id} failed: {e}")
        report = context.report if context.report is not None else context.new_report()
        report.notes.append(str(e))
        result = ExperimentResult(report, [], error=e)

    report: Report = result.report
    report.runtime = time.perf_counter() - started
    report.config_hash = config.content_hash()
    report.seed = config.seed
    result.artifacts.append(report.save(out_dir))
    status = "passed" if result.passed else "FAILED"
    logger.info(f"{experiment_id} {status} in {report.runtime:.1f}s ({len(report.failed_claims())} failed claims)")
    return result
