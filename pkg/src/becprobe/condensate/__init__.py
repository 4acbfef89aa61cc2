from .bogoliubov import (
    BasisConfig,
    BdgMethod,
    BogoliubovBasis,
    analytic_reference,
    build_basis,
    export_modes,
    export_spectrum,
    max_safe_modes,
    solve_bdg,
    zero_mode_pair,
)
from .grid import GridConfig, KineticScheme, SpatialGrid
from .meanfield import (
    MeanField,
    TrapConfig,
    export_mean_field,
    number_dephasing_rate,
    solve_ground_state,
    thomas_fermi_mu,
    thomas_fermi_profile,
)
from .units import PhysicalTrap

__all__ = [
    "BasisConfig",
    "BdgMethod",
    "BogoliubovBasis",
    "GridConfig",
    "KineticScheme",
    "MeanField",
    "PhysicalTrap",
    "SpatialGrid",
    "TrapConfig",
    "analytic_reference",
    "build_basis",
    "export_mean_field",
    "export_modes",
    "export_spectrum",
    "max_safe_modes",
    "number_dephasing_rate",
    "solve_bdg",
    "solve_ground_state",
    "thomas_fermi_mu",
    "thomas_fermi_profile",
    "zero_mode_pair",
]
