"""Degree-distribution fitting and component analysis."""

from defiblocks.topology.alternatives import (
    Alternative,
    LRComparison,
    compare_distributions,
    vuong_ratio,
)
from defiblocks.topology.components import (
    ComponentMatrix,
    ComponentMode,
    ComponentReport,
    component_protocol_matrix,
    connected_components,
)
from defiblocks.topology.degrees import degree_sequence, degree_values, top_degree_rows
from defiblocks.topology.powerlaw import (
    GoFResult,
    PowerLawFit,
    bootstrap_gof,
    ccdf_rows,
    fit_power_law,
    sample_power_law,
)

__all__ = [
    "Alternative",
    "ComponentMatrix",
    "ComponentMode",
    "ComponentReport",
    "GoFResult",
    "LRComparison",
    "PowerLawFit",
    "bootstrap_gof",
    "ccdf_rows",
    "compare_distributions",
    "component_protocol_matrix",
    "connected_components",
    "degree_sequence",
    "degree_values",
    "fit_power_law",
    "sample_power_law",
    "top_degree_rows",
    "vuong_ratio",
]
