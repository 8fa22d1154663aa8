"""Shared graphs used across the test suite.

The fixtures cover the canonical identification benchmarks: backdoor and
front-door adjustment, confounded clusters where the effect is lost, the
bow graph, and split treatment/outcome clusterings.
"""

import pytest

from cdag import Admg, ClusterDag, Partition, build_cdag


# Backdoor cluster graph: Z -> X, Z -> Y, X -> Y (effect identifiable by
# adjustment over Z).
@pytest.fixture
def backdoor_cdag():
    return ClusterDag(Admg(["X", "Y", "Z"], [("Z", "X"), ("Z", "Y"), ("X", "Y")]))


# Same skeleton with Z confounded with both X and Y but no Z -> X edge
# (effect not identifiable).
@pytest.fixture
def confounded_cdag():
    return ClusterDag(Admg(["X", "Y", "Z"], [("Z", "Y"), ("X", "Y")],
                           [("X", "Z"), ("Y", "Z")]))


# Confounded variant that keeps the Z -> X edge (also not identifiable);
# the shape used by the simulation harness.
@pytest.fixture
def confounded_sim_cdag():
    return ClusterDag(Admg(["X", "Y", "Z"],
                           [("Z", "X"), ("Z", "Y"), ("X", "Y")],
                           [("X", "Z"), ("Y", "Z")]))


# Five-variable diagrams compatible with the two cluster graphs above,
# with Z = {Z1, Z2, Z3}.
def _z_partition():
    return Partition([("X", ["X"]), ("Y", ["Y"]), ("Z", ["Z1", "Z2", "Z3"])])


@pytest.fixture
def backdoor_diagram_a():
    return Admg(["X", "Y", "Z1", "Z2", "Z3"],
                [("X", "Y"), ("Z1", "Z2"), ("Z1", "X"), ("Z3", "Z2"), ("Z3", "Y")])


@pytest.fixture
def backdoor_diagram_b():
    return Admg(["X", "Y", "Z1", "Z2", "Z3"],
                [("X", "Y"), ("Z1", "Z2"), ("Z2", "Y"), ("Z2", "X"),
                 ("Z1", "X"), ("Z3", "Z2"), ("Z3", "Y")])


@pytest.fixture
def confounded_diagram_c():
    return Admg(["X", "Y", "Z1", "Z2", "Z3"],
                [("X", "Y"), ("Z1", "Z2"), ("Z3", "Y"), ("Z3", "Z2")],
                [("Z1", "Z3"), ("Z3", "Y"), ("Z1", "X")])


@pytest.fixture
def confounded_diagram_d():
    return Admg(["X", "Y", "Z1", "Z2", "Z3"],
                [("X", "Y"), ("Z1", "Z2"), ("Z2", "Y"), ("Z3", "Z2")],
                [("Z1", "Z3"), ("Z3", "Y"), ("Z1", "X")])


@pytest.fixture
def z_partition():
    return _z_partition()


# Seven-variable medication example: treatment X, outcome Y, mediator S,
# covariates A..D with mixed confounding.
@pytest.fixture
def med_admg():
    return Admg(["A", "B", "C", "D", "S", "X", "Y"],
                [("D", "X"), ("X", "S"), ("S", "Y"), ("B", "C"), ("C", "Y"),
                 ("A", "Y"), ("A", "C")],
                [("X", "B"), ("C", "Y"), ("D", "C")])


# Clustering the covariates of med_admg into Z yields the front-door shape:
# Z -> X, Z <-> X, Z -> Y, Z <-> Y, X -> S, S -> Y.
@pytest.fixture
def med_partition():
    return Partition([("S", ["S"]), ("X", ["X"]), ("Y", ["Y"]),
                      ("Z", ["A", "B", "C", "D"])])


@pytest.fixture
def frontdoor_cdag(med_admg, med_partition):
    return build_cdag(med_admg, med_partition)


# Merging the mediator with a covariate (W = {B, S}, Z = {A, C}) keeps the
# partition admissible but loses identifiability.
@pytest.fixture
def merged_mediator_partition():
    return Partition([("D", ["D"]), ("W", ["B", "S"]), ("X", ["X"]),
                      ("Y", ["Y"]), ("Z", ["A", "C"])])


@pytest.fixture
def merged_mediator_cdag(med_admg, merged_mediator_partition):
    return build_cdag(med_admg, merged_mediator_partition)


# Six-variable diagram with two treatments, two outcomes, two covariates.
@pytest.fixture
def two_treatment_admg():
    return Admg(["X1", "X2", "Y1", "Y2", "Z1", "Z2"],
                [("X1", "X2"), ("X2", "Y1"), ("Y1", "Y2"), ("Z1", "Y1"),
                 ("Z2", "X2")],
                [("Y1", "Y2"), ("Z1", "X1"), ("Z2", "Y2")])


# All three clusterings of two_treatment_admg: everything merged (not
# identifiable), covariates kept apart (identifiable by adjustment), and
# treatments kept apart (identifiable).
@pytest.fixture
def merged_covariates_cdag():
    return ClusterDag(Admg(["X", "Y", "Z"], [("X", "Y"), ("Z", "X"), ("Z", "Y")],
                           [("Z", "X"), ("Z", "Y")]))


@pytest.fixture
def split_covariates_cdag():
    return ClusterDag(Admg(["X", "Y", "Z1", "Z2"],
                           [("X", "Y"), ("Z1", "Y"), ("Z2", "X")],
                           [("Z1", "X"), ("Z2", "Y")]))


@pytest.fixture
def split_treatments_cdag():
    return ClusterDag(Admg(["X1", "X2", "Y", "Z"],
                           [("X1", "X2"), ("X2", "Y"), ("Z", "X2"), ("Z", "Y")],
                           [("Z", "Y"), ("Z", "X1")]))


# Four-variable sequential-treatment diagram whose joint effect factors
# into an observed term and an adjustment term.
@pytest.fixture
def sequential_admg():
    return Admg(["X1", "X2", "Y1", "Y2"],
                [("X1", "X2"), ("X2", "Y1"), ("X2", "Y2"), ("X1", "Y1"),
                 ("Y1", "Y2")],
                [("X1", "Y2")])


@pytest.fixture
def bow_cdag():
    return ClusterDag(Admg(["X", "Y"], [("X", "Y")], [("X", "Y")]))
