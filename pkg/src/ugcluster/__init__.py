"""k-median and k-center clustering of uncertain graphs."""
from .errors import CapExceededError, GraphFormatError, ParameterError, SolverError, UGClusterError
from .exact import ExactOracle, brute_force_kcenter, brute_force_kmedian, exact_pr_connect, exact_table
from .graph import (
    ClusteringSignature,
    ConnectivityTable,
    UncertainGraph,
    assign_clusters,
    kc_value,
    km_value,
    parse_graph,
)
from .kcenter import (
    KCenterEps,
    gonzalez,
    sampling_kc_1,
    search_kc,
    search_kc_1,
    search_kc_plus,
)
from .kmedian import (
    sampling_km,
    search_km,
    search_km_plus,
    solve_kmd2_baseline,
    solve_kmedian_oracle,
)
from .report import SolveReport
from .sampling import PossibleWorld, SampleSet, WorldSampler, sample_worlds

__all__ = [
    "CapExceededError",
    "ClusteringSignature",
    "ConnectivityTable",
    "ExactOracle",
    "GraphFormatError",
    "KCenterEps",
    "ParameterError",
    "PossibleWorld",
    "SampleSet",
    "SolveReport",
    "SolverError",
    "UGClusterError",
    "UncertainGraph",
    "WorldSampler",
    "assign_clusters",
    "brute_force_kcenter",
    "brute_force_kmedian",
    "exact_pr_connect",
    "exact_table",
    "gonzalez",
    "kc_value",
    "km_value",
    "parse_graph",
    "sample_worlds",
    "sampling_kc_1",
    "sampling_km",
    "search_kc",
    "search_kc_1",
    "search_kc_plus",
    "search_km",
    "search_km_plus",
    "solve_kmd2_baseline",
    "solve_kmedian_oracle",
]
