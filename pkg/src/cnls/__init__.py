"""Ground states of weakly coupled cubic Schrodinger systems.

Radial finite-difference solver for the system

    -Laplace(u_i) + lambda_i u_i = mu_i u_i^3 + u_i sum_{j != i} b_ij u_j^2

on R^N (N = 1, 2, 3), with Nehari-constrained minimization, a semitrivial /
fully-nontrivial phase classifier, equal-lambda system reduction, and the
closed-form parameter thresholds as checkable predicates.
"""

from .functional import ActionBreakdown, action, action_gradient, action_on_nehari, nehari_scale
from .grid import Field, MultiField, RadialGrid, apply_neg_laplacian_plus, default_radius, h1_lambda_sq, l4_quartic, mixed_l2
from .params import (
    AdmissibilityReport,
    ParameterSet,
    SpreadConditionReport,
    alpha_threshold,
    coupling_spread_condition,
    is_alpha_admissible,
    lambda_cluster_condition,
    lambda_tail_condition,
    small_b_bound,
    validate,
)
from .phase import (
    FULLY_NONTRIVIAL,
    INCONCLUSIVE,
    SEMITRIVIAL,
    PhaseOptions,
    PhaseVerdict,
    classify,
    monotonicity_check,
    scaling_check,
    sweep,
)
from .reduction import (
    ReducedSystem,
    SphereMaxResult,
    brute_force_sphere_max,
    f_eval,
    lift_ground_state,
    reduce_system,
    sphere_max,
)
from .solver import (
    CertificateReport,
    GroundStateResult,
    SolverOptions,
    ground_state,
    minimize_restricted,
    perturbation_certificate,
    semitrivial_level,
)

__version__ = "0.1.0"

__all__ = [
    "ActionBreakdown",
    "AdmissibilityReport",
    "CertificateReport",
    "Field",
    "FULLY_NONTRIVIAL",
    "GroundStateResult",
    "INCONCLUSIVE",
    "MultiField",
    "ParameterSet",
    "PhaseOptions",
    "PhaseVerdict",
    "RadialGrid",
    "ReducedSystem",
    "SEMITRIVIAL",
    "SolverOptions",
    "SphereMaxResult",
    "SpreadConditionReport",
    "action",
    "action_gradient",
    "action_on_nehari",
    "alpha_threshold",
    "apply_neg_laplacian_plus",
    "brute_force_sphere_max",
    "classify",
    "coupling_spread_condition",
    "default_radius",
    "f_eval",
    "ground_state",
    "h1_lambda_sq",
    "is_alpha_admissible",
    "l4_quartic",
    "lambda_cluster_condition",
    "lambda_tail_condition",
    "lift_ground_state",
    "minimize_restricted",
    "mixed_l2",
    "monotonicity_check",
    "nehari_scale",
    "perturbation_certificate",
    "reduce_system",
    "scaling_check",
    "semitrivial_level",
    "small_b_bound",
    "sphere_max",
    "sweep",
    "validate",
]
