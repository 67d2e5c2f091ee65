"""Manufactured-truth experiments, noise models, sweeps and the command line."""

from .config import ConfigError, ExperimentConfig, load_config
from .noise import make_noisy
from .pipeline import PipelineError, ReconstructionReport, RunRecord, build_problem, read_grid, run_pipeline
from .study import StudyResult, convergence_study

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "make_noisy",
    "PipelineError",
    "ReconstructionReport",
    "RunRecord",
    "build_problem",
    "read_grid",
    "run_pipeline",
    "StudyResult",
    "convergence_study",
]
