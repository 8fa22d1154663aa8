"""Generation of variable-level graphs compatible with a cluster DAG.

Compatibility is enforced constructively: a deterministic witness
skeleton realizes every cluster edge first, then the chosen policies add
internal structure and extra cross edges that can never change the
quotient.  Internal directed edges always follow each cluster's member
order, so the variable graph is acyclic by construction and every output
passes the exact compatibility check.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple

import numpy as np

from .graphs import Admg
from .cluster import ClusterDag, Partition, is_compatible


@dataclass(frozen=True)
class InternalPolicy:
    """Connections inside a cluster.

    ``random`` draws directed edges along the member order with
    probability ``edge_density`` and bidirected edges with probability
    ``bidirected_density``; ``chain`` links consecutive members with a
    directed and a parallel bidirected edge; ``full`` wires every ordered
    pair both ways; ``empty`` adds nothing.
    """

    kind: str
    edge_density: float = 0.0
    bidirected_density: float = 0.0

    def __post_init__(self):
        if self.kind not in ("random", "chain", "full", "empty"):
            raise ValueError(f"unknown internal policy {self.kind!r}")
        for d in (self.edge_density, self.bidirected_density):
            if not 0.0 <= d <= 1.0:
                raise ValueError(f"density {d!r} outside [0, 1]")


@dataclass(frozen=True)
class CrossPolicy:
    """Connections between clusters joined by a cluster edge.

    ``minimal_witness`` realizes each cluster edge with exactly one
    deterministic variable edge (first members by order); ``random``
    places one witness uniformly among the cross pairs and adds further
    pairs with probability ``density``; ``full`` wires every cross pair.
    A fixed witness seat would make every sample share one distinguished
    member per cluster, which badly skews identifiability statistics, so
    the random policy randomizes the seat as well.
    """

    kind: str
    density: float = 0.0

    def __post_init__(self):
        if self.kind not in ("minimal_witness", "random", "full"):
            raise ValueError(f"unknown cross policy {self.kind!r}")
        if not 0.0 <= self.density <= 1.0:
            raise ValueError(f"density {self.density!r} outside [0, 1]")


@dataclass(frozen=True)
class ExpansionSpec:
    sizes: Dict[str, int] = field(default_factory=dict)
    internal: InternalPolicy = InternalPolicy("empty")
    cross: CrossPolicy = CrossPolicy("minimal_witness")
    seed: int = 0

    def size_of(self, cluster: str) -> int:
        size = self.sizes.get(cluster, 1)
        if size < 1:
            raise ValueError(f"size for cluster {cluster!r} must be >= 1")
        return size


def _member_names(cluster: str, size: int) -> Tuple[str, ...]:
    if size == 1:
        return (cluster,)
    return tuple(f"{cluster}_{k}" for k in range(1, size + 1))


def _item_rng(seed: int, index: int) -> np.random.Generator:
    # Counter-based derivation: item seeds are independent streams keyed
    # by (seed, index), so batches parallelize deterministically.
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def expand(c: ClusterDag, spec: ExpansionSpec) -> Tuple[Admg, Partition]:
    """A variable-level graph and partition with quotient exactly ``c``.

    With all sizes 1 and any policies the result is the cluster graph
    itself under the singleton partition.
    """
    rng = _item_rng(spec.seed, 0)
    members = {name: _member_names(name, spec.size_of(name)) for name in c.graph.nodes}
    partition = Partition([(name, members[name]) for name in c.graph.nodes])

    directed: List[Tuple[str, str]] = []
    bidirected: List[Tuple[str, str]] = []

    for name in c.graph.nodes:
        mem = members[name]
        kind = spec.internal.kind
        if kind == "chain":
            for a, b in zip(mem, mem[1:]):
                directed.append((a, b))
                bidirected.append((a, b))
        elif kind == "full":
            for i in range(len(mem)):
                for j in range(i + 1, len(mem)):
                    directed.append((mem[i], mem[j]))
                    bidirected.append((mem[i], mem[j]))
        elif kind == "random":
            for i in range(len(mem)):
                for j in range(i + 1, len(mem)):
                    if rng.random() < spec.internal.edge_density:
                        directed.append((mem[i], mem[j]))
                    if rng.random() < spec.internal.bidirected_density:
                        bidirected.append((mem[i], mem[j]))

    def cross_pairs(tail_cluster, head_cluster):
        pairs = [(a, b) for a in members[tail_cluster] for b in members[head_cluster]]
        if spec.cross.kind == "minimal_witness":
            return [pairs[0]]
        if spec.cross.kind == "full":
            return pairs
        witness = pairs[int(rng.integers(len(pairs)))]
        return [witness] + [pair for pair in pairs
                            if pair != witness and rng.random() < spec.cross.density]

    for tail, head in sorted(c.graph.directed):
        directed.extend(cross_pairs(tail, head))
    for a, b in sorted(c.graph.bidirected):
        bidirected.extend(cross_pairs(a, b))

    variables = [v for name in c.graph.nodes for v in members[name]]
    graph = Admg(variables, directed, bidirected)
    assert is_compatible(graph, c, partition)
    return graph, partition


def sample_batch(c: ClusterDag, spec: ExpansionSpec, count: int) -> List[Tuple[Admg, Partition]]:
    """``count`` independent expansions with per-item seeds derived from
    ``spec.seed`` by the counter-based splitting rule."""
    out = []
    for i in range(count):
        item = ExpansionSpec(sizes=spec.sizes, internal=spec.internal,
                             cross=spec.cross, seed=_derive_seed(spec.seed, i))
        out.append(expand(c, item))
    return out


def _derive_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(index,))
               .generate_state(1, np.uint64)[0])
