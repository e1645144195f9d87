"""Ground states of the focusing NLS energy on metric graphs.

The energy is E(u) = (1/2)||u'||^2 - (1/p)\\int_K |u|^p, minimized over
functions with prescribed mass ||u||^2 = mu on a graph made of a compact
core K plus finitely many half-lines; the nonlinearity sees only the core.

Modules: graphs (topology, partitions, file format), functions (meshes,
piecewise-linear functions, rearrangement), energy (energy, gradients,
stationarity residuals), thresholds (analytic existence and nonexistence
thresholds, certificates, scaling), solver (projected descent, truncation
schedules, verdicts), checks (randomized property suites), cli (front end).
"""

from .energy import (
    ELReport,
    EnergyOperator,
    EnergyReport,
    default_gn_constants,
    el_residual,
    energy_gradient,
    energy_report,
    energy_value,
    gn_check,
    require_p,
)
from .functions import (
    GraphFunction,
    LineProfile,
    Mesh,
    abs_power_integral,
    decreasing_rearrangement,
    interpolate,
    kinetic_energy,
    l2_norm_sq,
    linf_norm,
    load_function,
    lp_integral,
    lp_norm_core,
    project_mass,
    save_function,
)
from .graphs import (
    INFINITE,
    Edge,
    GraphFormatError,
    InvalidGraphError,
    MetricGraph,
    Partition,
    ValidationReport,
    core_measure,
    distance_to_point,
    double_bridge,
    enumerate_partitions,
    graph_to_text,
    homothety,
    line_graph,
    load_graph,
    measure_core,
    metric_graph,
    parse_graph_text,
    part_core_measure,
    partition_violations,
    save_graph,
    shortest_distances,
    star_graph,
    validate,
)
from .solver import (
    INCONCLUSIVE,
    NEGATIVE_MINIMUM,
    ZERO_INFIMUM_SUSPECTED,
    DichotomyResult,
    MinimizationResult,
    SolverConfig,
    dirichlet_line_min,
    existence_dichotomy,
    initializer_competitor,
    initializer_random,
    initializer_soliton,
    minimize,
    soliton_profile,
)
from .thresholds import (
    CascadeTable,
    CompetitorCriticalPoint,
    MassThresholds,
    NonexistenceCertificate,
    ScalingCheck,
    ThresholdReport,
    certify_nonexistence,
    competitor_energy,
    competitor_mass_requirement,
    const_Cp,
    g_critical_point,
    inductive_bound_check,
    mass_thresholds,
    scaling_check,
    threshold_exist,
    threshold_nonexist,
    threshold_report,
)

__all__ = [
    "ELReport",
    "EnergyOperator",
    "EnergyReport",
    "default_gn_constants",
    "el_residual",
    "energy_gradient",
    "energy_report",
    "energy_value",
    "gn_check",
    "require_p",
    "GraphFunction",
    "LineProfile",
    "Mesh",
    "abs_power_integral",
    "decreasing_rearrangement",
    "interpolate",
    "kinetic_energy",
    "l2_norm_sq",
    "linf_norm",
    "load_function",
    "lp_integral",
    "lp_norm_core",
    "project_mass",
    "save_function",
    "INFINITE",
    "Edge",
    "GraphFormatError",
    "InvalidGraphError",
    "MetricGraph",
    "Partition",
    "ValidationReport",
    "core_measure",
    "distance_to_point",
    "double_bridge",
    "enumerate_partitions",
    "graph_to_text",
    "homothety",
    "line_graph",
    "load_graph",
    "measure_core",
    "metric_graph",
    "parse_graph_text",
    "part_core_measure",
    "partition_violations",
    "save_graph",
    "shortest_distances",
    "star_graph",
    "validate",
    "INCONCLUSIVE",
    "NEGATIVE_MINIMUM",
    "ZERO_INFIMUM_SUSPECTED",
    "DichotomyResult",
    "MinimizationResult",
    "SolverConfig",
    "dirichlet_line_min",
    "existence_dichotomy",
    "initializer_competitor",
    "initializer_random",
    "initializer_soliton",
    "minimize",
    "soliton_profile",
    "CascadeTable",
    "CompetitorCriticalPoint",
    "MassThresholds",
    "NonexistenceCertificate",
    "ScalingCheck",
    "ThresholdReport",
    "certify_nonexistence",
    "competitor_energy",
    "competitor_mass_requirement",
    "const_Cp",
    "g_critical_point",
    "inductive_bound_check",
    "mass_thresholds",
    "scaling_check",
    "threshold_exist",
    "threshold_nonexist",
    "threshold_report",
]
