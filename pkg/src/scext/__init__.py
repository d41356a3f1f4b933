"""Numerical extension of fractionally semiconcave functions beyond their domain.

The package builds explicit envelope extensions from (point, reachable
gradient) support pairs, certifies semiconcavity on sampled triples, glues
local extensions over ball covers, mollifies them into smooth approximants,
and traces singularity propagation arcs, with closed-form scenarios for
validation.
"""

from .errors import (
    DegenerateDirectionError,
    DimensionError,
    EvaluationError,
    HypothesisError,
    InputError,
    IsolationError,
    PartitionError,
    PropagationLostError,
    SamplingError,
    ScextError,
    StencilError,
)
from .extension import (
    ExtensionField,
    GlobalExtension,
    MollifiedApproximant,
    SupportSet,
    build_extension,
    build_support_set,
    constant_bound,
    extend,
    glue_global,
    holder_ratio,
    mollify,
    partition_weights,
    summand_differentiability_probe,
)
from .funcspace import (
    FunctionSpec,
    GradientSample,
    declared_domain,
    evaluate,
    evaluate_many,
    gradient,
    lipschitz_estimate,
    named_function,
    register_function,
    sampled_function,
)
from .geometry import (
    BallRegion,
    DomainSpec,
    boundary_sample,
    box,
    capped_disk,
    closure_grid,
    contains,
    disk,
    half_space,
    sample_closure_points,
    segment_in_closure,
)
from .gradients import (
    ConvexPolytope,
    ReachableGradientSet,
    convex_hull,
    hull_gap,
    is_singular,
    normal_cone_directions,
    polytope_distance,
    reachable_gradients,
    supergradient_defect,
)
from .semiconcavity import (
    ModulusParams,
    SemiconcavityCertificate,
    SemiconcavityTriple,
    certify,
    defect,
    estimate_constant,
)
from .singularity import (
    SingularArc,
    check_condition_h,
    propagation_directions,
    select_p0,
    singularity_indicator,
    trace_singular_arc,
)

__all__ = [
    "BallRegion",
    "ConvexPolytope",
    "DegenerateDirectionError",
    "DimensionError",
    "DomainSpec",
    "EvaluationError",
    "ExtensionField",
    "FunctionSpec",
    "GlobalExtension",
    "GradientSample",
    "HypothesisError",
    "InputError",
    "IsolationError",
    "ModulusParams",
    "MollifiedApproximant",
    "PartitionError",
    "PropagationLostError",
    "ReachableGradientSet",
    "SamplingError",
    "ScextError",
    "SemiconcavityCertificate",
    "SemiconcavityTriple",
    "SingularArc",
    "StencilError",
    "SupportSet",
    "boundary_sample",
    "box",
    "build_extension",
    "build_support_set",
    "capped_disk",
    "certify",
    "check_condition_h",
    "closure_grid",
    "constant_bound",
    "contains",
    "convex_hull",
    "declared_domain",
    "defect",
    "disk",
    "estimate_constant",
    "evaluate",
    "evaluate_many",
    "extend",
    "glue_global",
    "gradient",
    "half_space",
    "holder_ratio",
    "hull_gap",
    "is_singular",
    "lipschitz_estimate",
    "mollify",
    "named_function",
    "normal_cone_directions",
    "partition_weights",
    "polytope_distance",
    "propagation_directions",
    "reachable_gradients",
    "register_function",
    "sample_closure_points",
    "sampled_function",
    "segment_in_closure",
    "select_p0",
    "singularity_indicator",
    "summand_differentiability_probe",
    "supergradient_defect",
    "trace_singular_arc",
]
