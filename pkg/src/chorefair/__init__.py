"""Fair allocation of indivisible chores under binary-marginal cost functions.

The package bundles exact fairness checkers (envy-freeness, EFX, Pareto
optimality by enumeration), allocation algorithms for additive, cancelable,
submodular and general monotone binary-marginal costs, a brute-force
enumeration oracle, JSON instance I/O with seeded generators, and a CLI.
"""

from .costs import (
    Additive,
    CappedAdditive,
    Cardinality,
    CostFunction,
    Descriptor,
    FunctionClassReport,
    PartitionMatroidRank,
    ResidualView,
    Table,
    Threshold,
    check_class,
    evaluate,
    is_binary_marginal,
    marginal,
    residual,
    sample_class,
)
from .errors import (
    ChoreFairError,
    InternalInvariantError,
    InvalidInputError,
    ParseError,
    UnsupportedSizeError,
    WrongClassError,
)
from .fairness import (
    Allocation,
    EnvyGraph,
    FairnessReport,
    Violation,
    build_envy_graph,
    fairness_report,
    is_alpha_ef,
    is_alpha_efx,
    is_po_bruteforce,
    social_cost,
)
from .instances import (
    BUILTIN_NAMES,
    CLASSES,
    GENERATOR_FAMILIES,
    Instance,
    builtin,
    generate,
    instance_to_json,
    load_instance,
    parse_instance,
    serialize_instance,
)
from .oracle import EnumerationReport, analyze, efx_exists_search, enumerate_allocations
from .reports import GuaranteeTag, SolveReport
from .solvers import (
    SOLVERS,
    compute_m1,
    partition_items,
    solve_additive,
    solve_auto,
    solve_cancelable,
    solve_general,
    solve_submodular,
)

__version__ = "0.1.0"

__all__ = [
    "Additive",
    "Allocation",
    "BUILTIN_NAMES",
    "CLASSES",
    "CappedAdditive",
    "Cardinality",
    "ChoreFairError",
    "CostFunction",
    "Descriptor",
    "EnumerationReport",
    "EnvyGraph",
    "FairnessReport",
    "FunctionClassReport",
    "GENERATOR_FAMILIES",
    "GuaranteeTag",
    "Instance",
    "InternalInvariantError",
    "InvalidInputError",
    "ParseError",
    "PartitionMatroidRank",
    "ResidualView",
    "SOLVERS",
    "SolveReport",
    "Table",
    "Threshold",
    "UnsupportedSizeError",
    "Violation",
    "WrongClassError",
    "analyze",
    "build_envy_graph",
    "builtin",
    "check_class",
    "compute_m1",
    "efx_exists_search",
    "enumerate_allocations",
    "evaluate",
    "fairness_report",
    "generate",
    "instance_to_json",
    "is_alpha_ef",
    "is_alpha_efx",
    "is_binary_marginal",
    "is_po_bruteforce",
    "load_instance",
    "marginal",
    "parse_instance",
    "partition_items",
    "residual",
    "sample_class",
    "serialize_instance",
    "social_cost",
    "solve_additive",
    "solve_auto",
    "solve_cancelable",
    "solve_general",
    "solve_submodular",
    "__version__",
]
