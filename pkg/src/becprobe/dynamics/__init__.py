from .covariance import (
    CovarianceSeries,
    StepPlan,
    build_step_plan,
    check_step_size,
    evolve_covariance,
    evolve_unconditional,
    riccati_rhs,
)
from .ensemble import EnsembleSetup, EnsembleSummary, run_ensemble
from .exports import export_ensemble, export_record, export_snapshots, export_time_series
from .feedback import (
    ensemble_steady_state,
    feedback_crossover,
    feedback_energy,
    optimal_feedback_gain,
    steady_state_prediction,
    strong_feedback_gain,
    weak_feedback_gain,
)
from .oracle import (
    couple_probe,
    discrete_measurement_update,
    oracle_step,
    run_oracle,
    sample_outcomes,
)
from .state import GaussianState, JointGaussian, symplectic_eigenvalues, symplectic_form
from .trajectory import MeasurementRecord, TrajectoryResult, evolve_trajectory

__all__ = [
    "CovarianceSeries",
    "EnsembleSetup",
    "EnsembleSummary",
    "GaussianState",
    "JointGaussian",
    "MeasurementRecord",
    "StepPlan",
    "TrajectoryResult",
    "build_step_plan",
    "check_step_size",
    "couple_probe",
    "discrete_measurement_update",
    "ensemble_steady_state",
    "evolve_covariance",
    "evolve_trajectory",
    "evolve_unconditional",
    "export_ensemble",
    "export_record",
    "export_snapshots",
    "export_time_series",
    "feedback_crossover",
    "feedback_energy",
    "optimal_feedback_gain",
    "oracle_step",
    "riccati_rhs",
    "run_ensemble",
    "run_oracle",
    "sample_outcomes",
    "steady_state_prediction",
    "strong_feedback_gain",
    "symplectic_eigenvalues",
    "symplectic_form",
    "weak_feedback_gain",
]
