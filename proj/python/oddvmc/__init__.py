"""Variational Monte Carlo with odd readouts over determinant stacks.

Configs are plain dicts with the same keys as the JSON files the command
line reads.
"""

import json

from . import _core
from ._core import ConfigError, molecule_presets

__all__ = [
    "Ansatz",
    "ConfigError",
    "check",
    "config_hash",
    "molecule_presets",
    "resolve_config",
    "run",
    "train",
]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def _with_version(config):
    if isinstance(config, dict) and "schema_version" not in config:
        config = dict(config, schema_version=1)
    return _text(config)


def resolve_config(config):
    """Validated config with defaults filled in."""
    return json.loads(_core.resolve_config(_with_version(config)))


def config_hash(config):
    return _core.config_hash(_with_version(config))


class Ansatz(_core.Ansatz):
    """Wave function of the config's molecule and ansatz sections."""

    def __init__(self, config):
        super().__init__(_with_version(config))


def train(config):
    """Runs the optimisation; returns energy, stderr, params and per-step records."""
    return _core.train(_with_version(config))


def run(config, output_dir):
    """Like the `run` subcommand: trains and writes the run artifacts."""
    return _core.run_experiment(_with_version(config), str(output_dir))


def check(scope="all", trials=1000, seed=0, random_v=False):
    """Randomised structural checks; one report dict per check."""
    return [json.loads(r) for r in _core.run_checks(scope, trials, seed, random_v)]
