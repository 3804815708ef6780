"""Command-line harness: experiment specs, runs, sweeps and verification suites."""
from .config import ConfigError, ExperimentSpec, expand_cells, load_sweep, parse_sweep
from .runner import EXIT_ERROR, EXIT_OK, EXIT_VACUOUS, HarnessError, RunResult, run, sweep
from .verify import SUITES, Check, render, run_suite

__all__ = [
    "EXIT_ERROR", "EXIT_OK", "EXIT_VACUOUS", "SUITES", "Check", "ConfigError", "ExperimentSpec",
    "HarnessError", "RunResult", "expand_cells", "load_sweep", "parse_sweep", "render", "run",
    "run_suite", "sweep",
]
