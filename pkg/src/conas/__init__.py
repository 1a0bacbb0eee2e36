"""Sparse Boolean-Fourier recovery and multi-stage architecture search."""

from .engine import (
    SearchResult,
    StageResult,
    conas_search,
    final_encoding,
    run_stage,
    stage_statistics,
)
from .estimator import SparseFourierRegressor
from .fourier import (
    Evaluator,
    FourierExpansion,
    Restriction,
    all_encodings,
    enumerate_parities,
    exact_transform,
    expansion_eval,
    merge_point,
    parity_eval,
    restrict_expansion,
    restrict_oracle,
)
from .oracles import (
    DecisionTreeOracle,
    FunctionEvaluator,
    PlantedOracle,
    TabularOracle,
    load_tabular,
    make_decision_tree,
    make_planted,
    save_tabular,
    wrap_noise,
)
from .recovery import (
    LassoSolution,
    MeasurementSet,
    RecoveryConfig,
    build_sampling_matrix,
    kkt_residual,
    lasso_solve,
    minimize_over_support,
    sample_encodings,
    truncate_top_s,
)
from .space import (
    Cell,
    CellSpec,
    EdgeRef,
    count_configurations,
    darts_configuration_count,
    decode_cell,
    edge_count,
    edge_to_index,
    format_scientific,
    index_to_edge,
    repair_connectivity,
    validate_connectivity,
)

__version__ = "0.1.0"

__all__ = [
    "Cell",
    "CellSpec",
    "DecisionTreeOracle",
    "EdgeRef",
    "Evaluator",
    "FourierExpansion",
    "FunctionEvaluator",
    "LassoSolution",
    "MeasurementSet",
    "PlantedOracle",
    "RecoveryConfig",
    "Restriction",
    "SearchResult",
    "SparseFourierRegressor",
    "StageResult",
    "TabularOracle",
    "all_encodings",
    "build_sampling_matrix",
    "conas_search",
    "count_configurations",
    "darts_configuration_count",
    "decode_cell",
    "edge_count",
    "edge_to_index",
    "enumerate_parities",
    "exact_transform",
    "expansion_eval",
    "final_encoding",
    "format_scientific",
    "index_to_edge",
    "kkt_residual",
    "lasso_solve",
    "load_tabular",
    "make_decision_tree",
    "make_planted",
    "merge_point",
    "minimize_over_support",
    "parity_eval",
    "repair_connectivity",
    "restrict_expansion",
    "restrict_oracle",
    "run_stage",
    "sample_encodings",
    "save_tabular",
    "stage_statistics",
    "truncate_top_s",
    "validate_connectivity",
    "wrap_noise",
]
