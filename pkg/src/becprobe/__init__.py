"""
becprobe: Gaussian-state simulation of continuously imaged 1D Bose-Einstein condensates.

This package uses a src-layout. Import the package as `becprobe`.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("becprobe")
except PackageNotFoundError:
    __version__ = "unknown"

from .condensate import BasisConfig, BogoliubovBasis, GridConfig, TrapConfig, build_basis
from .config import BECPROBE_CONFIG, BecprobeConfig, get_becprobe_root, set_becprobe_root
from .dynamics import GaussianState, evolve_covariance, evolve_trajectory, run_ensemble
from .errors import (
    AliasingError,
    BecprobeError,
    ConditioningError,
    ConfigValidationError,
    ConvergenceError,
    ExperimentError,
    FiniteDifferenceError,
    GridResolutionError,
    NumericalError,
    PhysicalityError,
    ScheduleError,
    StepSizeError,
)
from .experiments import Experiment, RunSpec, SystemConfig, list_presets, resolve_config
from .probe import FeedbackSpec, ProbeConfig, ScheduleSpec, build_couplings
from .runtime import configure_logging, get_logger, load_env, log

__all__ = [
    "__version__",
    "AliasingError",
    "BECPROBE_CONFIG",
    "BasisConfig",
    "BecprobeConfig",
    "BecprobeError",
    "BogoliubovBasis",
    "ConditioningError",
    "ConfigValidationError",
    "ConvergenceError",
    "Experiment",
    "ExperimentError",
    "FeedbackSpec",
    "FiniteDifferenceError",
    "GaussianState",
    "GridConfig",
    "GridResolutionError",
    "NumericalError",
    "PhysicalityError",
    "ProbeConfig",
    "RunSpec",
    "ScheduleError",
    "ScheduleSpec",
    "StepSizeError",
    "SystemConfig",
    "TrapConfig",
    "build_basis",
    "build_couplings",
    "configure_logging",
    "evolve_covariance",
    "evolve_trajectory",
    "get_becprobe_root",
    "get_logger",
    "list_presets",
    "load_env",
    "log",
    "resolve_config",
    "run_ensemble",
    "set_becprobe_root",
]
