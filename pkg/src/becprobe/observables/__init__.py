from .correlations import (
    CorrelationField,
    MomentumField,
    RegionSpec,
    RegionStatistics,
    density_correlation,
    export_correlation_field,
    export_momentum_field,
    momentum_correlation,
    region_number_statistics,
)
from .entanglement import distinguishability, log_negativity, purity, qnd_entanglement_limit
from .quadratures import QuadratureStats, SqueezingAxis, optimal_quadrature, quadrature_stats

__all__ = [
    "CorrelationField",
    "MomentumField",
    "QuadratureStats",
    "RegionSpec",
    "RegionStatistics",
    "SqueezingAxis",
    "density_correlation",
    "distinguishability",
    "export_correlation_field",
    "export_momentum_field",
    "log_negativity",
    "momentum_correlation",
    "optimal_quadrature",
    "purity",
    "qnd_entanglement_limit",
    "quadrature_stats",
    "region_number_statistics",
]
