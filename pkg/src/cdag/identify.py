"""Complete identification of cluster-level causal effects.

Given a cluster DAG and disjoint cluster sets X and Y, decide whether
P(y|do(x)) is computable from the observational distribution over the
clusters, and produce either a symbolic formula or a witness of
non-identifiability.

The engine reduces to the ancestors of Y outside X, splits the reduced
graph into c-components, and identifies each c-factor from the factor of
its enclosing c-component by alternating ancestral marginalization with
c-component refinement.  Failure of that recursion yields a pair of
root-set-rooted c-forests, one containing intervened clusters and one
avoiding them; expanding every cluster into a chain with parallel
confounding and fully wiring cross-cluster pairs turns the witness into
a concrete variable-level graph where the same query fails.
"""

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Tuple, Union

from .graphs import Admg, GraphError
from .cluster import ClusterDag
from .formula import (CondProb, Fraction, ONE, ProbExpr, free_vars, product_of,
                      simplify, sum_over)


class EmptyInterventionError(ValueError):
    """Raised for an empty intervention set; use plain marginalization
    (:func:`observational_marginal`) instead."""


@dataclass(frozen=True)
class Hedge:
    """Witness of non-identifiability.

    ``forest_f`` and ``forest_fprime`` are edge subgraphs of the cluster
    graph, both rooted at ``root_set``: single c-component, every node
    with at most one child, and ``root_set`` the childless nodes.  The
    inner forest avoids X entirely while the outer one meets it at
    ``intersected_x``, and the roots are ancestors of Y once edges into
    X are cut.
    """

    root_set: FrozenSet[str]
    forest_f: Admg
    forest_fprime: Admg
    intersected_x: FrozenSet[str]

    def describe(self) -> str:
        def edges(g):
            parts = [f"{t} -> {h}" for t, h in sorted(g.directed)]
            parts += [f"{a} <-> {b}" for a, b in sorted(g.bidirected)]
            return ", ".join(parts) if parts else "(none)"

        return "\n".join([
            f"root set R: {{{', '.join(sorted(self.root_set))}}}",
            f"forest F over {{{', '.join(sorted(self.forest_f.nodes))}}}: "
            f"{edges(self.forest_f)}",
            f"forest F' over {{{', '.join(sorted(self.forest_fprime.nodes))}}}: "
            f"{edges(self.forest_fprime)}",
            f"intervened clusters in F: {{{', '.join(sorted(self.intersected_x))}}}",
        ])


@dataclass(frozen=True)
class Identified:
    expr: ProbExpr

    @property
    def identifiable(self) -> bool:
        return True


@dataclass(frozen=True)
class NonIdentified:
    hedge: Hedge

    @property
    def identifiable(self) -> bool:
        return False


IdResult = Union[Identified, NonIdentified]


@dataclass(frozen=True)
class QFactor:
    """The factor of one c-component: its post-intervention distribution
    under intervention on everything else, written in observed terms."""

    scope: FrozenSet[str]
    expr: ProbExpr


class _HedgeFound(Exception):
    def __init__(self, inner, outer):
        self.inner = frozenset(inner)
        self.outer = frozenset(outer)


def _validate_query(c: ClusterDag, x, y):
    clusters = set(c.graph.nodes)
    x = frozenset(x)
    y = frozenset(y)
    unknown = (x | y) - clusters
    if unknown:
        raise GraphError(f"unknown cluster(s): {sorted(unknown)}")
    if not y:
        raise GraphError("the target set y must be nonempty")
    if x & y:
        raise GraphError(f"x and y overlap: {sorted(x & y)}")
    return x, y


def ancestral_reduce(c: ClusterDag, x: Iterable[str], y: Iterable[str]) -> FrozenSet[str]:
    """Ancestral closure of ``y`` in the subgraph over the clusters not in ``x``."""
    x = frozenset(x)
    y = frozenset(y)
    sub = c.graph.induced(set(c.graph.nodes) - x)
    return sub.ancestral_closure(y)


def _chain_factor(order: Tuple[str, ...], members: Iterable[str]) -> ProbExpr:
    members = set(members)
    factors = []
    for i, node in enumerate(order):
        if node in members:
            factors.append(CondProb([node], order[:i]))
    return product_of(factors)


def q_factor(c: ClusterDag, s: Iterable[str]) -> QFactor:
    """Observable expression for the factor of c-component ``s``.

    Under the deterministic topological order C_1, ..., C_n the factor is
    the product of P(C_i | C_1, ..., C_{i-1}) over the members of ``s``.
    """
    s = frozenset(s)
    if s not in set(c.graph.c_components()):
        raise GraphError(f"{sorted(s)} is not a c-component of the cluster graph")
    return QFactor(s, _chain_factor(c.graph.topological_order(), s))


def _identify_component(graph: Admg, order: Tuple[str, ...],
                        target: FrozenSet[str], scope: FrozenSet[str],
                        q_expr: ProbExpr) -> ProbExpr:
    """Identify Q[target] from Q[scope], recursing on subgraph structure.

    ``target`` is bidirected-connected and contained in ``scope``, which
    is itself a c-component of the graph under consideration.  Raises
    :class:`_HedgeFound` when the ancestors of the target fill the whole
    scope without equalling it.
    """
    sub = graph.induced(scope)
    closure = sub.ancestral_closure(target)
    if closure == target:
        return sum_over(sorted(scope - target), q_expr)
    if closure == scope:
        raise _HedgeFound(target, scope)

    q_closure = sum_over(sorted(scope - closure), q_expr)
    closure_graph = graph.induced(closure)
    component = next(comp for comp in closure_graph.c_components() if target <= comp)

    # Factor of the refined component, as telescoping prefix ratios of
    # Q[closure] under the global topological order.
    ordered = [v for v in order if v in closure]
    prefix_exprs = {len(ordered): q_closure}
    for i in range(len(ordered) - 1, 0, -1):
        prefix_exprs[i] = sum_over([ordered[i]], prefix_exprs[i + 1])
    factors = []
    for i, node in enumerate(ordered, start=1):
        if node not in component:
            continue
        if i == 1:
            factors.append(prefix_exprs[1])
        else:
            factors.append(Fraction(prefix_exprs[i], prefix_exprs[i - 1]))
    return _identify_component(graph, order, target, component, product_of(factors))


def _run(c: ClusterDag, x: FrozenSet[str], y: FrozenSet[str]) -> ProbExpr:
    graph = c.graph
    order = graph.topological_order()
    reduced = ancestral_reduce(c, x, y)
    reduced_comps = graph.induced(reduced).c_components()
    full_comps = graph.c_components()

    factors = []
    for comp in reduced_comps:
        enclosing = next(s for s in full_comps if comp <= s)
        base = _chain_factor(order, enclosing)
        factors.append(_identify_component(graph, order, comp, enclosing, base))
    expr = sum_over(sorted(reduced - y), product_of(factors))

    # The chain factors may condition on clusters outside x and y; the
    # expression's value does not depend on those contexts (it equals the
    # effect at every one of them), so averaging them out under their
    # observed weight leaves a formula over the query variables alone.
    extra = free_vars(expr) - x - y
    if extra:
        expr = sum_over(sorted(extra), product_of([CondProb(sorted(extra)), expr]))
    return expr


def _build_hedge(c: ClusterDag, x: FrozenSet[str], y: FrozenSet[str],
                 inner: FrozenSet[str], outer: FrozenSet[str]) -> Hedge:
    graph = c.graph
    sub = graph.induced(outer)

    # Distance of every outer node to the inner set along directed edges.
    dist = {v: 0 for v in inner}
    frontier = set(inner)
    while frontier:
        nxt = set()
        for t, h in sub.directed:
            if h in dist and t not in dist:
                nxt.add(t)
        for v in nxt:
            dist[v] = min(dist[h] for t, h in sub.directed if t == v and h in dist) + 1
        frontier = nxt

    chosen = []
    for v in sorted(outer - inner):
        children = sorted(h for t, h in sub.directed
                          if t == v and h in dist and dist[h] == dist[v] - 1)
        chosen.append((v, children[0]))

    forest_f = Admg(sorted(outer), chosen, sub.bidirected)
    forest_fprime = Admg(sorted(inner), (),
                         [(a, b) for a, b in sub.bidirected if a in inner and b in inner])
    hedge = Hedge(root_set=inner, forest_f=forest_f, forest_fprime=forest_fprime,
                  intersected_x=frozenset(outer & x))
    _validate_hedge(c, hedge, x, y)
    return hedge


def _validate_hedge(c: ClusterDag, h: Hedge, x: FrozenSet[str], y: FrozenSet[str]):
    def check_forest(forest: Admg, name: str):
        children = {}
        for t, head in forest.directed:
            children.setdefault(t, []).append(head)
            if len(children[t]) > 1:
                raise AssertionError(f"{name}: node {t} has more than one child")
        roots = frozenset(v for v in forest.nodes if v not in children)
        if roots != h.root_set:
            raise AssertionError(f"{name}: root set {sorted(roots)} is not "
                                 f"{sorted(h.root_set)}")
        if len(forest.c_components()) != 1:
            raise AssertionError(f"{name}: not a single c-component")

    check_forest(h.forest_f, "forest F")
    check_forest(h.forest_fprime, "forest F'")
    if not set(h.forest_fprime.nodes) <= set(h.forest_f.nodes):
        raise AssertionError("F' is not contained in F")
    if not h.forest_fprime.directed <= h.forest_f.directed or \
            not h.forest_fprime.bidirected <= h.forest_f.bidirected:
        raise AssertionError("F' edges are not contained in F")
    if set(h.forest_fprime.nodes) & x:
        raise AssertionError("F' intersects the intervention set")
    if not (set(h.forest_f.nodes) & x):
        raise AssertionError("F does not intersect the intervention set")
    if frozenset(h.forest_f.nodes) & x != h.intersected_x:
        raise AssertionError("recorded intersection with X is wrong")
    mutilated = c.graph.mutilate(cut_into=x)
    if not h.root_set <= mutilated.ancestral_closure(y):
        raise AssertionError("root set is not ancestral for Y after cutting into X")


def identify(c: ClusterDag, x: Iterable[str], y: Iterable[str]) -> IdResult:
    """Decide identifiability of P(y|do(x)) in the cluster DAG.

    Returns :class:`Identified` carrying a simplified expression over the
    observational cluster distribution, valid in every compatible
    underlying model, or :class:`NonIdentified` carrying a validated
    :class:`Hedge`.
    """
    x, y = _validate_query(c, x, y)
    if not x:
        raise EmptyInterventionError(
            "empty intervention set; use observational_marginal for plain marginals")
    try:
        expr = _run(c, x, y)
    except _HedgeFound as found:
        return NonIdentified(_build_hedge(c, x, y, found.inner, found.outer))
    return Identified(simplify(expr, reserved=x | y))


def find_hedge(c: ClusterDag, x: Iterable[str], y: Iterable[str]) -> Hedge:
    """The hedge of a non-identifiable query; error if identification succeeds."""
    result = identify(c, x, y)
    if isinstance(result, Identified):
        raise ValueError("identification succeeded; there is no hedge for this query")
    return result.hedge


def observational_marginal(c: ClusterDag, y: Iterable[str]) -> ProbExpr:
    """Expression for the plain marginal P(y), via ancestral reduction and
    the c-component factorization (the degenerate empty-intervention case)."""
    _, y = _validate_query(c, (), y)
    return simplify(_run(c, frozenset(), y), reserved=y)


def hedge_expansion_witness(c: ClusterDag, h: Hedge,
                            sizes: Dict[str, int]) -> Admg:
    """A compatible variable-level graph on which the query still fails.

    Every cluster becomes a chain with parallel bidirected edges between
    consecutive members, and every cross-cluster variable pair is wired
    according to the cluster edge types.  The construction preserves the
    hedge, so identification of the induced variable-level query fails on
    the result for any choice of cluster sizes.
    """
    if not set(h.forest_f.nodes) <= set(c.graph.nodes):
        raise ValueError("hedge does not belong to this cluster DAG")
    for name in c.graph.nodes:
        if sizes.get(name, 0) < 1:
            raise ValueError(f"size for cluster {name!r} must be a positive integer")
    from .sampler import ExpansionSpec, InternalPolicy, CrossPolicy, expand
    spec = ExpansionSpec(sizes=dict(sizes), internal=InternalPolicy("chain"),
                         cross=CrossPolicy("full"), seed=0)
    graph, _ = expand(c, spec)
    return graph
