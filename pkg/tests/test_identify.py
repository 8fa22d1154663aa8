import itertools

import pytest

from cdag import (Admg, ClusterDag, CondProb, EmptyInterventionError, Identified,
                  NonIdentified, Product, Sum, ancestral_reduce, equivalent_on,
                  evaluate, find_hedge, hedge_expansion_witness, identify,
                  interventional_distribution, joint_distribution,
                  observational_marginal, q_factor, random_cbn, render,
                  singleton_cdag)
from cdag.graphs import GraphError

from randutil import random_admg, rng_for


def compatible_tables(c, count, start_seed=0):
    """Joints of random models on the cluster graph itself: the canonical
    compatible distributions for equivalence checks."""
    cards = {v: 2 for v in c.graph.nodes}
    for seed in range(start_seed, start_seed + count):
        yield joint_distribution(random_cbn(c.graph, cards, seed=seed))


def assert_matches_oracle(c, x, y, expr, seed=99):
    m = random_cbn(c.graph, {v: 2 for v in c.graph.nodes}, seed=seed)
    t = joint_distribution(m)
    x, y = sorted(x), sorted(y)
    for xs in itertools.product(range(2), repeat=len(x)):
        post = interventional_distribution(m, dict(zip(x, xs)))
        for ys in itertools.product(range(2), repeat=len(y)):
            want = post.prob_of(dict(zip(y, ys)))
            got = evaluate(expr, t, dict(zip(x, xs)) | dict(zip(y, ys)))
            assert got == pytest.approx(want, abs=1e-9)


# -- identifiable benchmarks -------------------------------------------------

def test_frontdoor_adjustment(frontdoor_cdag):
    result = identify(frontdoor_cdag, ["X"], ["Y"])
    assert isinstance(result, Identified)
    assert render(result.expr) == "Σ_{s,z} P(s|x,z) Σ_{x'} P(z) P(x'|z) P(y|s,x',z)"
    closed_form = Sum(["S"], Product([
        CondProb(["S"], ["X"]),
        Sum(["X'"], Product([CondProb(["Y"], ["X'", "S"]), CondProb(["X'"])])),
    ]))
    for t in compatible_tables(frontdoor_cdag, 5):
        assert equivalent_on(result.expr, closed_form, t)
    assert_matches_oracle(frontdoor_cdag, ["X"], ["Y"], result.expr)


def test_backdoor_adjustment(backdoor_cdag):
    result = identify(backdoor_cdag, ["X"], ["Y"])
    assert isinstance(result, Identified)
    assert render(result.expr) == "Σ_z P(y|x,z) P(z)"
    assert_matches_oracle(backdoor_cdag, ["X"], ["Y"], result.expr)


def test_split_covariates_adjustment(split_covariates_cdag):
    result = identify(split_covariates_cdag, ["X"], ["Y"])
    assert isinstance(result, Identified)
    assert render(result.expr) == "Σ_{z1} (Σ_{z2} P(z2|z1) P(y|x,z1,z2)) P(z1)"
    closed_form = Sum(["Z1", "Z2"], Product([CondProb(["Y"], ["X", "Z1", "Z2"]),
                                       CondProb(["Z1", "Z2"])]))
    for t in compatible_tables(split_covariates_cdag, 5):
        assert equivalent_on(result.expr, closed_form, t)
    assert_matches_oracle(split_covariates_cdag, ["X"], ["Y"], result.expr)


def test_split_treatments_adjustment(split_treatments_cdag):
    result = identify(split_treatments_cdag, ["X1", "X2"], ["Y"])
    assert isinstance(result, Identified)
    assert render(result.expr) == "Σ_{z,x1'} P(x1') P(z|x1') P(y|x1',x2,z)"
    closed_form = Sum(["Z", "X1'"], Product([CondProb(["Y"], ["X1'", "X2", "Z"]),
                                       CondProb(["X1'", "Z"])]))
    for t in compatible_tables(split_treatments_cdag, 5):
        assert equivalent_on(result.expr, closed_form, t)
    assert_matches_oracle(split_treatments_cdag, ["X1", "X2"], ["Y"], result.expr)


def test_sequential_joint_intervention(sequential_admg):
    c = singleton_cdag(sequential_admg)
    result = identify(c, ["X1", "X2"], ["Y1", "Y2"])
    assert isinstance(result, Identified)
    assert render(result.expr) == "P(y1|x1,x2) Σ_{x1'} P(x1') P(y2|x1',x2,y1)"
    closed_form = Product([
        CondProb(["Y1"], ["X1", "X2"]),
        Sum(["X1'"], Product([CondProb(["Y2"], ["X1'", "X2", "Y1"]),
                              CondProb(["X1'"])])),
    ])
    for t in compatible_tables(c, 5):
        assert equivalent_on(result.expr, closed_form, t)
    assert_matches_oracle(c, ["X1", "X2"], ["Y1", "Y2"], result.expr)


def test_frontdoor_on_variable_level_model(med_admg, med_partition, frontdoor_cdag):
    # Both the classical front-door form and the engine's output, with the
    # covariate cluster expanded to its four member variables, reproduce
    # the truncated-factorization oracle of a seven-variable model.
    m = random_cbn(med_admg, {v: 2 for v in med_admg.nodes}, seed=71)
    t = joint_distribution(m)
    clusters = med_partition.to_cluster_map()
    closed_form = Sum(["S"], Product([
        CondProb(["S"], ["X"]),
        Sum(["X'"], Product([CondProb(["Y"], ["X'", "S"]), CondProb(["X'"])])),
    ]))
    mine = identify(frontdoor_cdag, ["X"], ["Y"]).expr
    for x in range(2):
        post = interventional_distribution(m, {"X": x})
        for y in range(2):
            want = post.prob_of({"Y": y})
            assign = {"X": x, "Y": y}
            assert evaluate(closed_form, t, assign, clusters) == pytest.approx(
                want, abs=1e-9)
            assert evaluate(mine, t, assign, clusters) == pytest.approx(
                want, abs=1e-9)


def test_identified_sum_normalizes(frontdoor_cdag):
    expr = identify(frontdoor_cdag, ["X"], ["Y"]).expr
    for t in compatible_tables(frontdoor_cdag, 3, start_seed=40):
        for x in range(2):
            total = sum(evaluate(expr, t, {"X": x, "Y": y}) for y in range(2))
            assert total == pytest.approx(1.0, abs=1e-9)


# -- non-identifiable benchmarks ---------------------------------------------

def test_confounded_cluster_not_identifiable(confounded_cdag):
    result = identify(confounded_cdag, ["X"], ["Y"])
    assert isinstance(result, NonIdentified)
    h = result.hedge
    assert h.intersected_x == {"X"}
    assert "X" not in h.forest_fprime.nodes


def test_merged_covariates_not_identifiable(merged_covariates_cdag):
    result = identify(merged_covariates_cdag, ["X"], ["Y"])
    assert isinstance(result, NonIdentified)


def test_merged_mediator_not_identifiable(merged_mediator_cdag):
    result = identify(merged_mediator_cdag, ["X"], ["Y"])
    assert isinstance(result, NonIdentified)
    assert result.hedge.root_set == {"W"}


def test_bow_not_identifiable(bow_cdag):
    result = identify(bow_cdag, ["X"], ["Y"])
    assert isinstance(result, NonIdentified)
    h = result.hedge
    assert h.root_set == {"Y"}
    assert set(h.forest_f.nodes) == {"X", "Y"}
    assert h.forest_f.directed == {("X", "Y")}
    assert h.forest_f.bidirected == {("X", "Y")}
    assert set(h.forest_fprime.nodes) == {"Y"}
    assert not h.forest_fprime.directed and not h.forest_fprime.bidirected


def test_find_hedge_requires_failure(backdoor_cdag, confounded_cdag):
    with pytest.raises(ValueError):
        find_hedge(backdoor_cdag, ["X"], ["Y"])
    h = find_hedge(confounded_cdag, ["X"], ["Y"])
    assert h.intersected_x == {"X"}


# -- witnesses ----------------------------------------------------------------

def test_hedge_expansion_witness_sizes_one(confounded_cdag):
    h = find_hedge(confounded_cdag, ["X"], ["Y"])
    g = hedge_expansion_witness(confounded_cdag, h, {"X": 1, "Y": 1, "Z": 1})
    assert g == confounded_cdag.graph
    assert isinstance(identify(singleton_cdag(g), ["X"], ["Y"]), NonIdentified)


def test_hedge_expansion_witness_chain(confounded_cdag):
    h = find_hedge(confounded_cdag, ["X"], ["Y"])
    g = hedge_expansion_witness(confounded_cdag, h, {"X": 1, "Y": 1, "Z": 3})
    assert len(g.nodes) == 5
    assert ("Z_1", "Z_2") in g.directed and ("Z_2", "Z_3") in g.directed
    assert ("Z_1", "Z_2") in g.bidirected
    result = identify(singleton_cdag(g), ["X"], ["Y"])
    assert isinstance(result, NonIdentified)


def test_hedge_expansion_witness_validates_sizes(confounded_cdag):
    h = find_hedge(confounded_cdag, ["X"], ["Y"])
    with pytest.raises(ValueError):
        hedge_expansion_witness(confounded_cdag, h, {"X": 1, "Y": 0, "Z": 1})


# -- the pieces ---------------------------------------------------------------

def test_q_factor_single_root():
    c = ClusterDag(Admg(["A", "B"], [("A", "B")]))
    qf = q_factor(c, ["A"])
    assert qf.expr == CondProb(["A"])


def test_q_factor_whole_graph_is_chain_product():
    c = ClusterDag(Admg(["X", "Y"], [("X", "Y")], [("X", "Y")]))
    qf = q_factor(c, ["X", "Y"])
    assert qf.expr == Product([CondProb(["X"]), CondProb(["Y"], ["X"])])


def test_q_factor_confounded(confounded_cdag):
    # Deterministic topological order is X, Z, Y (lexicographic roots first).
    qf = q_factor(confounded_cdag, ["X", "Y", "Z"])
    assert qf.expr == Product([CondProb(["X"]), CondProb(["Z"], ["X"]),
                               CondProb(["Y"], ["X", "Z"])])


def test_q_factor_rejects_non_component(backdoor_cdag):
    with pytest.raises(GraphError):
        q_factor(backdoor_cdag, ["X", "Y"])


def test_q_decomposition_identity(med_admg):
    # The product of all c-component factors evaluates to the joint.
    c = singleton_cdag(med_admg)
    m = random_cbn(med_admg, {v: 2 for v in med_admg.nodes}, seed=31)
    t = joint_distribution(m)
    exprs = [q_factor(c, comp).expr for comp in c.graph.c_components()]
    for state in itertools.product(range(2), repeat=len(med_admg.nodes)):
        assignment = dict(zip(med_admg.nodes, state))
        prod = 1.0
        for e in exprs:
            prod *= evaluate(e, t, assignment)
        assert prod == pytest.approx(t.prob_of(assignment), abs=1e-9)


def test_ancestral_reduce_chain():
    c = ClusterDag(Admg(["M", "X", "Y"], [("X", "M"), ("M", "Y")]))
    assert ancestral_reduce(c, ["X"], ["Y"]) == {"M", "Y"}


def test_ancestral_reduce_drops_isolated():
    c = ClusterDag(Admg(["W", "X", "Y"], [("X", "Y")]))
    assert ancestral_reduce(c, ["X"], ["Y"]) == {"Y"}


def test_ancestral_reduce_frontdoor(frontdoor_cdag):
    assert ancestral_reduce(frontdoor_cdag, ["X"], ["Y"]) == {"S", "Y", "Z"}


def test_empty_intervention_rejected(backdoor_cdag):
    with pytest.raises(EmptyInterventionError):
        identify(backdoor_cdag, [], ["Y"])


def test_observational_marginal(backdoor_cdag):
    expr = observational_marginal(backdoor_cdag, ["Y"])
    m = random_cbn(backdoor_cdag.graph, {v: 2 for v in "XYZ"}, seed=32)
    t = joint_distribution(m)
    for y in range(2):
        assert evaluate(expr, t, {"Y": y}) == pytest.approx(
            t.prob_of({"Y": y}), abs=1e-12)


def test_invalid_queries(backdoor_cdag):
    with pytest.raises(GraphError):
        identify(backdoor_cdag, ["X"], ["X"])
    with pytest.raises(GraphError):
        identify(backdoor_cdag, ["X"], [])
    with pytest.raises(GraphError):
        identify(backdoor_cdag, ["Q"], ["Y"])


def test_singleton_consistency_with_admg_engine():
    # Wrapping an Admg with or without the singleton partition gives the
    # same verdicts and formulas.
    rng = rng_for(37)
    for _ in range(30):
        g = random_admg(rng, int(rng.integers(3, 7)))
        nodes = list(g.nodes)
        x, y = nodes[0], nodes[-1]
        if x == y:
            continue
        bare = identify(ClusterDag(g), [x], [y])
        wrapped = identify(singleton_cdag(g), [x], [y])
        assert type(bare) is type(wrapped)
        if isinstance(bare, Identified):
            assert bare.expr == wrapped.expr


def test_identified_formulas_sound_on_random_graphs():
    rng = rng_for(41)
    hits = 0
    for _ in range(40):
        g = random_admg(rng, int(rng.integers(3, 6)), p_dir=0.5, p_bi=0.3)
        nodes = list(g.nodes)
        x, y = nodes[0], nodes[-1]
        result = identify(singleton_cdag(g), [x], [y])
        if not isinstance(result, Identified):
            continue
        hits += 1
        assert_matches_oracle(singleton_cdag(g), [x], [y], result.expr,
                              seed=int(rng.integers(10 ** 6)))
    assert hits >= 10
