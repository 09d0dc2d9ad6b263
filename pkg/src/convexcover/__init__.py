"""Separated families, cover schedules, and epigraph geometry for
bounded convex functions on axis-aligned boxes.

The package splits into five layers:

  functions   convex function forms, evaluation, serialization
  metrics     Lp / sup / epigraph-Hausdorff distances and greedy packing
  packing     well-separated families from interval systems and binary codes
  schedule    log-space refinement schedules and cover-count accounting
  verify      inequality checks, closed forms, and the assembled bounds
"""

from .functions import (
    Affine,
    ConvexFunction,
    DomainError,
    Hinge,
    LipschitzVector,
    MaxAffine,
    MaxWith,
    ParameterError,
    Rect,
    Rescaled,
    SeparableQuadratic,
    coordinate_lipschitz_estimate,
    function_from_json,
    lipschitz_budget,
    make_random_convex,
    rescale_to_unit,
    tensor_points,
    unit_rect,
)
from .metrics import (
    DistanceReport,
    EpigraphSupportQuery,
    GridSpec,
    HausdorffEpigraphMetric,
    LpMetric,
    SupGridMetric,
    direction_covering_radius,
    direction_set,
    epigraph_support,
    greedy_packing,
    hausdorff_epigraph,
    lp_distance,
    quadrature_grid,
    sup_grid_distance,
    vertex_grid,
)
from .packing import (
    CapPropertyReport,
    CodeSearchResult,
    IntervalSystem,
    PackingCertificate,
    PackingFamily,
    SeparationPoint,
    build_interval_system,
    build_packing_family,
    cap_function,
    cell_gap,
    cell_gap_quadrature,
    code_min_distance,
    code_target,
    greedy_binary_code,
    interval_count,
    max_eta,
    packing_certificate,
    perturbed_function,
    separation_curve,
    separation_point,
    separation_scale,
    verify_cap_properties,
)
from .schedule import (
    Breakpoints,
    CoverAccounting,
    Schedule,
    ScheduleChecks,
    breakpoints,
    build_schedule,
    cover_accounting,
    log_radius_closed_form,
    schedule_checks,
    schedule_from_eta,
)
from .verify import (
    EntropyBounds,
    LemmaReport,
    ScalingIdentityReport,
    check_l1_bound,
    check_pointwise_gap,
    check_sup_bound,
    entropy_bounds,
    gradient_mass,
    hinge_family,
    hinge_hausdorff_closed_form,
    hinge_lp_closed_form,
    scaling_identity_report,
    slice_gradient_mass,
)

__version__ = "0.1.0"

__all__ = [
    "Affine", "ConvexFunction", "DomainError", "Hinge", "LipschitzVector",
    "MaxAffine", "MaxWith", "ParameterError", "Rect", "Rescaled",
    "SeparableQuadratic", "coordinate_lipschitz_estimate",
    "function_from_json", "lipschitz_budget", "make_random_convex",
    "rescale_to_unit", "tensor_points", "unit_rect",
    "DistanceReport", "EpigraphSupportQuery", "GridSpec",
    "HausdorffEpigraphMetric", "LpMetric", "SupGridMetric",
    "direction_covering_radius", "direction_set",
    "epigraph_support", "greedy_packing", "hausdorff_epigraph", "lp_distance",
    "quadrature_grid", "sup_grid_distance", "vertex_grid",
    "CapPropertyReport", "CodeSearchResult", "IntervalSystem",
    "PackingCertificate", "PackingFamily", "SeparationPoint",
    "build_interval_system", "build_packing_family", "cap_function",
    "cell_gap", "cell_gap_quadrature", "code_min_distance", "code_target",
    "greedy_binary_code", "interval_count", "max_eta", "packing_certificate",
    "perturbed_function", "separation_curve", "separation_point",
    "separation_scale", "verify_cap_properties",
    "Breakpoints", "CoverAccounting", "Schedule", "ScheduleChecks",
    "breakpoints", "build_schedule", "cover_accounting",
    "log_radius_closed_form", "schedule_checks", "schedule_from_eta",
    "EntropyBounds", "LemmaReport", "ScalingIdentityReport", "check_l1_bound",
    "check_pointwise_gap", "check_sup_bound", "entropy_bounds",
    "gradient_mass", "hinge_family", "hinge_hausdorff_closed_form",
    "hinge_lp_closed_form", "scaling_identity_report", "slice_gradient_mass",
]
