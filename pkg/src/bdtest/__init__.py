"""Sublinear testers and exact distance oracles for bounded-step function
classes on hypergrids, under uniform and rational product distributions."""

from .bounds import (
    BoundingFamily,
    FunctionTable,
    MetricAxiomReport,
    SymmetrizedLine,
    check_metric_axioms,
    is_member,
    symmetrize,
    symmetrize_offsets,
)
from .distributions import (
    BloatedGrid,
    PreservationReport,
    ProductDistribution,
    distance_preservation_check,
)
from .errors import (
    CapacityError,
    DegenerateRangeError,
    GenerationError,
    PreconditionError,
    UnsupportedBoundsError,
)
from .grid import (
    AxisLine,
    GridPoint,
    HypergridDomain,
    all_lines,
    iter_lines,
    line_count,
    slice_points,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    FarInstance,
    RejectionEstimate,
    estimate_rejection,
    gen_far,
    gen_member,
    run_experiment,
    wilson_interval,
)
from .testers import (
    LineTesterPlan,
    LinePairSet,
    TesterConfig,
    Verdict,
    bound_ratio,
    default_iterations,
    hypergrid_tester,
    l2_tester,
    line_pair_set,
    line_tester,
    monotonicity_pair_tester,
    product_tester,
)
from .violation import (
    CrossPairReport,
    DimensionReductionReport,
    Matching,
    ViolationGraph,
    build_violation_graph,
    dimension_reduction_check,
    isotonic_l1_oracle,
    l1_distance,
    matching_weight,
    max_weight_matching,
    no_cross_pair_check,
    violation_score,
)

__version__ = "0.1.0"

__all__ = [
    "AxisLine",
    "BloatedGrid",
    "BoundingFamily",
    "CapacityError",
    "CrossPairReport",
    "DegenerateRangeError",
    "DimensionReductionReport",
    "ExperimentConfig",
    "ExperimentReport",
    "FarInstance",
    "FunctionTable",
    "GenerationError",
    "GridPoint",
    "HypergridDomain",
    "LinePairSet",
    "LineTesterPlan",
    "Matching",
    "MetricAxiomReport",
    "PreconditionError",
    "PreservationReport",
    "ProductDistribution",
    "RejectionEstimate",
    "SymmetrizedLine",
    "TesterConfig",
    "UnsupportedBoundsError",
    "Verdict",
    "ViolationGraph",
    "all_lines",
    "bound_ratio",
    "build_violation_graph",
    "check_metric_axioms",
    "default_iterations",
    "dimension_reduction_check",
    "distance_preservation_check",
    "estimate_rejection",
    "gen_far",
    "gen_member",
    "hypergrid_tester",
    "is_member",
    "isotonic_l1_oracle",
    "iter_lines",
    "l1_distance",
    "l2_tester",
    "line_count",
    "line_pair_set",
    "line_tester",
    "matching_weight",
    "max_weight_matching",
    "monotonicity_pair_tester",
    "no_cross_pair_check",
    "product_tester",
    "run_experiment",
    "slice_points",
    "symmetrize",
    "symmetrize_offsets",
    "violation_score",
    "wilson_interval",
]
