from .base import Experiment, RunContext, RunSpec, SystemConfig
from .couplings import CouplingsExperiment
from .covariance import CovarianceExperiment, PurityExperiment
from .ensemble import EnsembleExperiment, FeedbackExperiment
from .entanglement import EntanglementExperiment
from .numbers import NumberStatisticsExperiment
from .oracle import OracleExperiment
from .presets import PresetInfo, list_presets, load_preset, resolve_config
from .squeezing import SqueezingExperiment
from .validation import ValidationIssue, ValidationReport, validate_experiment

__all__ = [
    "CouplingsExperiment",
    "CovarianceExperiment",
    "EnsembleExperiment",
    "EntanglementExperiment",
    "Experiment",
    "FeedbackExperiment",
    "NumberStatisticsExperiment",
    "OracleExperiment",
    "PresetInfo",
    "PurityExperiment",
    "RunContext",
    "RunSpec",
    "SqueezingExperiment",
    "SystemConfig",
    "ValidationIssue",
    "ValidationReport",
    "list_presets",
    "load_preset",
    "resolve_config",
    "validate_experiment",
]
