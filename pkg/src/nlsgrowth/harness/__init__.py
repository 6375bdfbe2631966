"""Experiment harness: configs, simulation runs, growth fits and the verification suite."""

from .config import ConfigError, SimulationConfig, load_config, parse_config
from .fit import GrowthFit, fit_growth
from .simulate import DiagnosticsRecord, run_simulation
from .verify import verify_claims

__all__ = [
    "ConfigError",
    "DiagnosticsRecord",
    "GrowthFit",
    "SimulationConfig",
    "fit_growth",
    "load_config",
    "parse_config",
    "run_simulation",
    "verify_claims",
]
