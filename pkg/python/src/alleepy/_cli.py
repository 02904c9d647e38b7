# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

import logging
import sys
from pathlib import Path

import fire

from . import defaults
from ._common import AlleepyError, ConfigError, ConfigIssue
from ._config import ExperimentConfig, parse_config
from ._harness import ExperimentResult, run_experiment

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _load(config: str, mode: str, seed_grid: int) -> ExperimentConfig:
    path = Path(config)
    if not path.is_file():
        raise ConfigError([ConfigIssue(None, "config", f"{config} is not a readable file")])
    loaded = parse_config(path.read_text(), mode)
    if seed_grid:
        if seed_grid < defaults.MIN_SEEDS_PER_AXIS:
            raise ConfigError(
                [ConfigIssue(None, "seed-grid", f"must be at least {defaults.MIN_SEEDS_PER_AXIS}, got {seed_grid}")]
            )
        loaded = loaded._replace(output=loaded.output._replace(seeds_per_axis=seed_grid))
    return loaded


def _report(result: ExperimentResult):
    print(f"{result.mode} run {result.state}, artifacts in {result.directory}")
    for key, value in result.summary.items():
        print(f"  {key}: {value}")


def _command(mode: str):
    def run(config: str, out: str = "", jobs: int = 1, seed_grid: int = 0, log_level: str = "INFO"):
        logging.basicConfig(level=log_level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")
        logging.captureWarnings(True)
        result = run_experiment(_load(config, mode, seed_grid), out or None, jobs)
        _report(result)
        if result.state != "complete":
            raise AlleepyError(f"{mode} run is {result.state}; see {Path(result.directory) / 'MANIFEST'}")

    run.__name__ = mode
    run.__doc__ = f"Runs the experiment in CONFIG in {mode} mode; writes into OUT or output.directory."
    return run


def main() -> int:
    try:
        fire.Fire({mode: _command(mode) for mode in ("analyze", "simulate", "compete", "eig", "sweep")}, name="alleepy")
    except ConfigError as error:
        print(f"invalid config:\n{error}", file=sys.stderr)
        return EXIT_CONFIG
    except (AlleepyError, ValueError) as error:
        logger.error("%s", error)
        print(f"error: {error}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK
