"""RC-network realizability and topology reconstruction for identified models."""

from .errors import (
    BothConstraintsActive,
    GenerationBudgetExceeded,
    GramMismatch,
    NoFeasiblePoint,
    NoStrictlyPositive,
    NodeCountMismatch,
    NotPositiveDefinite,
    NotRCRealizable,
    RCNetError,
    SingularT,
    TrivialCone,
)
from .linalg import (
    Diagonalization,
    OrthoSample,
    commuting_pattern,
    gram_rotation,
    orthonormal_complement,
    random_orthogonal,
    real_diagonalize,
    spd_sqrt,
)
from .metzler import (
    RestartRecord,
    SearchConfig,
    SearchResult,
    is_metzler,
    minimize_l1,
    solve_exhaustive_small_k,
    solve_metzler,
)
from .model import StateSpaceModel
from .netgen import (
    RCInstance,
    WeightedGraph,
    compare_graphs,
    emit_dot,
    graph_from_S,
    load_model,
    random_rc_instance,
    save_model,
)
from .pipeline import PipelineOptions, PipelineResult, run_pipeline
from .rotation import (
    RCRealization,
    RotationFamily,
    assemble_realization,
    build_ZW,
    reduce_full_column_rank,
    rotation_family,
)
from .scaling import (
    ScalingCone,
    ScalingOptions,
    ScalingSolution,
    VariableLayout,
    build_scaling_system,
    enumerate_generators,
    select_positive_solution,
    solve_joint_nonconvex,
    solve_relaxed,
    uniqueness_heuristic,
)

__version__ = "0.1.0"

__all__ = [
    "BothConstraintsActive",
    "Diagonalization",
    "GenerationBudgetExceeded",
    "GramMismatch",
    "NoFeasiblePoint",
    "NoStrictlyPositive",
    "NodeCountMismatch",
    "NotPositiveDefinite",
    "NotRCRealizable",
    "OrthoSample",
    "PipelineOptions",
    "PipelineResult",
    "RCInstance",
    "RCNetError",
    "RCRealization",
    "RestartRecord",
    "RotationFamily",
    "ScalingCone",
    "ScalingOptions",
    "ScalingSolution",
    "SearchConfig",
    "SearchResult",
    "SingularT",
    "StateSpaceModel",
    "TrivialCone",
    "VariableLayout",
    "WeightedGraph",
    "assemble_realization",
    "build_ZW",
    "build_scaling_system",
    "commuting_pattern",
    "compare_graphs",
    "emit_dot",
    "enumerate_generators",
    "gram_rotation",
    "graph_from_S",
    "is_metzler",
    "load_model",
    "minimize_l1",
    "orthonormal_complement",
    "random_orthogonal",
    "random_rc_instance",
    "real_diagonalize",
    "reduce_full_column_rank",
    "rotation_family",
    "run_pipeline",
    "save_model",
    "select_positive_solution",
    "solve_exhaustive_small_k",
    "solve_joint_nonconvex",
    "solve_metzler",
    "solve_relaxed",
    "spd_sqrt",
    "uniqueness_heuristic",
]
