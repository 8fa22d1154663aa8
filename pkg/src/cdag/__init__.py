"""Causal effect identification over cluster DAGs.

The package is organised around a small number of immutable values:

* :class:`~cdag.graphs.Admg` - directed acyclic mixed graphs,
* :class:`~cdag.cluster.ClusterDag` - quotients of ADMGs under an
  admissible partition of their variables,
* :class:`~cdag.formula.ProbExpr` - symbolic probability expressions
  produced by identification,
* :class:`~cdag.oracle.DiscreteCbn` - exact discrete causal models used
  as ground truth.
"""

from .graphs import Admg, CycleError, GraphError, UnknownNodeError
from .cluster import (
    ClusterDag,
    InadmissibleError,
    Partition,
    PartitionError,
    as_admg,
    build_cdag,
    cdag_d_separated,
    is_compatible,
    mutilate_cdag,
    singleton_cdag,
)
from .formula import (
    CondProb,
    Fraction,
    JointTable,
    ONE,
    ProbExpr,
    Product,
    Sum,
    ZeroConditioningMass,
    equivalent_on,
    evaluate,
    parse_formula_json,
    render,
    simplify,
)
from .identify import (
    EmptyInterventionError,
    Hedge,
    Identified,
    NonIdentified,
    QFactor,
    ancestral_reduce,
    find_hedge,
    hedge_expansion_witness,
    identify,
    observational_marginal,
    q_factor,
)
from .docalc import DoQuery, RuleVerdict, rule1, rule2, rule3
from .oracle import (
    DiscreteCbn,
    MacroScm,
    StateSpaceCapError,
    build_macro_scm,
    cluster_factorization_check,
    counterfactual_prob,
    interventional_distribution,
    joint_distribution,
    random_cbn,
    sample_dataset,
)
from .sampler import CrossPolicy, ExpansionSpec, InternalPolicy, expand, sample_batch

__version__ = "0.1.0"

__all__ = [
    "Admg", "CycleError", "GraphError", "UnknownNodeError",
    "ClusterDag", "InadmissibleError", "Partition", "PartitionError",
    "as_admg", "build_cdag", "cdag_d_separated", "is_compatible",
    "mutilate_cdag", "singleton_cdag",
    "CondProb", "Fraction", "JointTable", "ONE", "ProbExpr", "Product",
    "Sum", "ZeroConditioningMass", "equivalent_on", "evaluate",
    "parse_formula_json", "render", "simplify",
    "EmptyInterventionError", "Hedge", "Identified", "NonIdentified",
    "QFactor", "ancestral_reduce", "find_hedge", "hedge_expansion_witness",
    "identify", "observational_marginal", "q_factor",
    "DoQuery", "RuleVerdict", "rule1", "rule2", "rule3",
    "DiscreteCbn", "MacroScm", "StateSpaceCapError", "build_macro_scm",
    "cluster_factorization_check", "counterfactual_prob",
    "interventional_distribution", "joint_distribution", "random_cbn",
    "sample_dataset",
    "CrossPolicy", "ExpansionSpec", "InternalPolicy", "expand", "sample_batch",
]
