from .config import BeamProfile, GaussianBeam, ProbeConfig, UniformBeam
from .couplings import (
    CouplingSet,
    build_couplings,
    coupling_profile,
    environment_couplings,
    environment_couplings_direct,
    export_couplings,
    hermite_couplings,
    pixel_couplings,
    pixel_edges,
    thomas_fermi_couplings,
)
from .generators import FeedbackSpec, Generators, assemble_generators, drift_matrix
from .kernel import apply_kernel, diffraction_kernel, kernel_lags, kernel_weight
from .schedule import (
    ProbeSchedule,
    ScheduleMode,
    ScheduleSpec,
    Segment,
    export_schedule,
    make_schedule,
    sample_strength,
)

__all__ = [
    "BeamProfile",
    "CouplingSet",
    "FeedbackSpec",
    "GaussianBeam",
    "Generators",
    "ProbeConfig",
    "ProbeSchedule",
    "ScheduleMode",
    "ScheduleSpec",
    "Segment",
    "UniformBeam",
    "apply_kernel",
    "assemble_generators",
    "build_couplings",
    "coupling_profile",
    "diffraction_kernel",
    "drift_matrix",
    "environment_couplings",
    "environment_couplings_direct",
    "export_couplings",
    "export_schedule",
    "hermite_couplings",
    "kernel_lags",
    "kernel_weight",
    "make_schedule",
    "pixel_couplings",
    "pixel_edges",
    "sample_strength",
    "thomas_fermi_couplings",
]
