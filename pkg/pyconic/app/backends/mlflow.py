import os
from typing import Optional

from pyconic import logger
from pyconic.model.config import ExperimentConfig
from pyconic.model.results import RunReport
from pyconic.utils.util import find_package_version, is_package_available
from pyconic.variables import MLRUNS_FOLDER

# Longest parameter value mlflow accepts
MAX_PARAM_LENGTH = 250


def flatten_params(config: ExperimentConfig):
    """
    Config values as flat section.key parameters, long values cut to what mlflow accepts.
    """
    params = {}
    for section, values in config.dict(by_alias=True).items():
        if not isinstance(values, dict):
            continue
        for key, value in values.items():
            if value is not None:
                params["{}.{}".format(section, key)] = str(value)[:MAX_PARAM_LENGTH]
    return params


def track_run(report: RunReport, config: ExperimentConfig, folder) -> Optional[str]:
    """
    Log the parameters, the finite summary values and the output files of a run to a file based mlflow store in
    <folder>/mlruns.
    :return: The mlflow run id or None when mlflow is not installed
    """
    if not is_package_available("mlflow"):
        logger.warning("Tracking was requested but mlflow is not installed. Install the 'tracking' extra.")
        return None
    import mlflow

    mlflow.set_tracking_uri("file:" + os.path.abspath(os.path.join(folder, MLRUNS_FOLDER)))
    mlflow.set_experiment(config.run.experiment)
    with mlflow.start_run(run_name=report.command) as active:
        tags = {"command": report.command, "kind": report.kind, "version": report.version}
        for package in ("numpy", "scipy"):
            tags[package + ".version"] = find_package_version(package) or "unknown"
        mlflow.set_tags(tags)
        mlflow.log_params(flatten_params(config))
        mlflow.log_metrics(report.metrics())
        for entry in report.entries:
            for step, (l2, sigma1) in enumerate(zip(entry.l2_errors, entry.sigma1_errors)):
                mlflow.log_metric("l2_error_eps{:.6g}".format(entry.epsilon), l2, step=step)
                mlflow.log_metric("sigma1_error_eps{:.6g}".format(entry.epsilon), sigma1, step=step)
        for path in report.files:
            if os.path.isfile(path):
                mlflow.log_artifact(path)
        run_id = active.info.run_id
    logger.info("Tracked run {} in experiment {}".format(run_id, config.run.experiment))
    return run_id
