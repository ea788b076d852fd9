"""Cost-efficient fortification portfolios for failure-prone networks.

Model a network whose nodes fail independently, declare which border
pairs must stay connected, list fortification actions that lower node
failure probabilities, and optionally restrict the objective weights.
The library enumerates every cost-efficient action portfolio, applies
minimum reliability requirements, and reports per-action core indices,
failure-probability sensitivity, and centrality comparisons.
"""

__version__ = "0.1.0"

from .analytics import (
    CORE_AT_MOST,
    CORE_EXACT,
    CentralityReport,
    CoreIndexTable,
    SensitivityCell,
    SensitivityReport,
    centrality,
    core_index,
    core_index_table,
    frontier_fingerprint,
    portfolio_fingerprint,
    reliability_curves,
    sensitivity_sweep,
)
from .errors import (
    ApproximationWarning,
    BasisMismatchError,
    EnumerationCapError,
    FortinetError,
    InfeasiblePortfolioError,
    InfeasibleWeightSetError,
    NetworkValidationError,
    ObjectiveError,
    ProblemFileError,
)
from .frontier import (
    BOUND_ALL_ON,
    BOUND_EXACT,
    BasicSet,
    ExtensionBound,
    Frontier,
    algorithm1,
    algorithm2,
    all_on_upper_bound,
    brute_force_frontier,
    count_feasible,
    extended_portfolio,
    extension_upper_bound,
    solve_exact_weights,
)
from .graphs import (
    DEFAULT_ENUMERATION_CAP,
    Network,
    NodeSpec,
    build_network,
    enumerate_states,
    is_connected,
    operational_subgraph,
    state_probability,
)
from .portfolios import (
    AT_MOST_K,
    IMPLIES,
    MUTEX,
    EvaluatedPortfolio,
    EvaluationContext,
    FortificationAction,
    LogicalConstraint,
    ProblemSpec,
    build_problem,
    cost_efficient_wrt,
    dominates,
    effective_probabilities,
    evaluate,
    is_feasible,
    portfolio_cost,
    utility_equivalent,
)
from .preferences import (
    ExtremePointSet,
    WeightConstraint,
    WeightSet,
    augment_with_requirements,
    extreme_points,
    make_weight_set,
    noninformative_set,
    ratio_constraints_from_volumes,
)
from .problem_io import (
    ProblemDocument,
    RunOptions,
    document_data,
    dumps_document,
    load_document,
    loads_document,
    parse_document,
    spec_digest,
)
from .reliability import (
    AUTO,
    EXACT,
    MCUB,
    MONTE_CARLO,
    CutSetCollection,
    Objective,
    ReliabilityContext,
    ReliabilityEstimate,
    connection_reliabilities,
    minimal_cuts,
    reliability_exact,
    reliability_mcub,
    reliability_monte_carlo,
)

__all__ = [
    "__version__",
    "AT_MOST_K",
    "AUTO",
    "BOUND_ALL_ON",
    "BOUND_EXACT",
    "CORE_AT_MOST",
    "CORE_EXACT",
    "EXACT",
    "IMPLIES",
    "MCUB",
    "MONTE_CARLO",
    "MUTEX",
    "ApproximationWarning",
    "BasisMismatchError",
    "BasicSet",
    "CentralityReport",
    "CoreIndexTable",
    "CutSetCollection",
    "DEFAULT_ENUMERATION_CAP",
    "EnumerationCapError",
    "EvaluatedPortfolio",
    "EvaluationContext",
    "ExtensionBound",
    "ExtremePointSet",
    "FortificationAction",
    "FortinetError",
    "Frontier",
    "InfeasiblePortfolioError",
    "InfeasibleWeightSetError",
    "LogicalConstraint",
    "Network",
    "NetworkValidationError",
    "NodeSpec",
    "Objective",
    "ObjectiveError",
    "ProblemDocument",
    "ProblemFileError",
    "ProblemSpec",
    "ReliabilityContext",
    "ReliabilityEstimate",
    "RunOptions",
    "SensitivityCell",
    "SensitivityReport",
    "WeightConstraint",
    "WeightSet",
    "algorithm1",
    "algorithm2",
    "all_on_upper_bound",
    "augment_with_requirements",
    "brute_force_frontier",
    "build_network",
    "build_problem",
    "centrality",
    "connection_reliabilities",
    "core_index",
    "core_index_table",
    "cost_efficient_wrt",
    "count_feasible",
    "document_data",
    "dominates",
    "dumps_document",
    "effective_probabilities",
    "enumerate_states",
    "evaluate",
    "extended_portfolio",
    "extension_upper_bound",
    "extreme_points",
    "frontier_fingerprint",
    "is_connected",
    "is_feasible",
    "load_document",
    "loads_document",
    "make_weight_set",
    "minimal_cuts",
    "noninformative_set",
    "operational_subgraph",
    "parse_document",
    "portfolio_cost",
    "portfolio_fingerprint",
    "ratio_constraints_from_volumes",
    "reliability_curves",
    "reliability_exact",
    "reliability_mcub",
    "reliability_monte_carlo",
    "sensitivity_sweep",
    "solve_exact_weights",
    "spec_digest",
    "state_probability",
    "utility_equivalent",
]
