"""Gradient flows of nonnegative homogeneous polynomials.

The package revolves around one dynamical object, the descent flow
x' = -grad phi(x) of a nonnegative homogeneous polynomial phi, and the
structures that make it useful: retraction of space onto the zero set,
moment energies of linear group actions, scale-invariant gradient
inequalities that control the decay rate, and the simultaneous
orthogonalization of vector families behind the commuting-family
bounds.
"""

from .poly import (
    HomogeneousPolynomial,
    GradientField,
    euler_residual,
    build_variety_phi,
    compose_linear,
)
from .flow import (
    FlowOptions,
    Trajectory,
    RetractResult,
    RetractionPath,
    DecayFit,
    ConvergenceError,
    AlreadyConvergedError,
    integrate_flow,
    flow_at_times,
    retract,
    retraction_path,
    decay_fit,
    arclength_tail,
)
from .groups import (
    SelfAdjointBasis,
    orthonormalize_basis,
    project_lie,
    MomentMap,
    moment_phi,
    moment_grad,
    moment_phi_projected,
    moment_grad_projected,
    tangent_residual,
    CriticalityReport,
    criticality,
    MinNormReport,
    min_norm_check,
    CompactGroupSampler,
    average_phi_K,
    EquivarianceReport,
    equivariance_check,
    OrbitLimitResult,
    orbit_limit,
)
from .ortho import (
    OrthogonalizationResult,
    AlignedFamily,
    simultaneous_orthogonalize,
    align_operator_family,
    span_rank,
)
from .inequalities import (
    SphereSampler,
    InequalityReport,
    RatioScan,
    NeemanRatio,
    lojasiewicz_ratio,
    lojasiewicz_scan,
    neeman_ratio,
    single_matrix_bound,
    single_matrix_scan,
    estimate_neeman_constant,
)
from .config import ConfigError, load_config, config_hash, build_system

__version__ = "0.1.0"

__all__ = [
    "HomogeneousPolynomial", "GradientField", "euler_residual",
    "build_variety_phi", "compose_linear",
    "FlowOptions", "Trajectory", "RetractResult", "RetractionPath",
    "DecayFit", "ConvergenceError", "AlreadyConvergedError",
    "integrate_flow", "flow_at_times", "retract", "retraction_path",
    "decay_fit", "arclength_tail",
    "SelfAdjointBasis", "orthonormalize_basis", "project_lie", "MomentMap",
    "moment_phi", "moment_grad", "moment_phi_projected",
    "moment_grad_projected", "tangent_residual", "CriticalityReport",
    "criticality", "MinNormReport", "min_norm_check", "CompactGroupSampler",
    "average_phi_K", "EquivarianceReport", "equivariance_check",
    "OrbitLimitResult", "orbit_limit",
    "OrthogonalizationResult", "AlignedFamily", "simultaneous_orthogonalize",
    "align_operator_family", "span_rank",
    "SphereSampler", "InequalityReport", "RatioScan", "NeemanRatio",
    "lojasiewicz_ratio", "lojasiewicz_scan", "neeman_ratio",
    "single_matrix_bound", "single_matrix_scan", "estimate_neeman_constant",
    "ConfigError", "load_config", "config_hash", "build_system",
    "__version__",
]
