"""Acyclic directed mixed graphs (ADMGs) and the algorithms on them.

An ADMG has directed edges (causal influence) and bidirected edges
(latent confounding between the endpoints).  Kinship relations follow
directed edges only.  All values are immutable after construction and
every operation is a pure function, so graphs are safe to share freely.
"""

from collections import deque
from typing import Iterable, Tuple, FrozenSet


class GraphError(ValueError):
    """Base class for graph construction and query errors."""


class CycleError(GraphError):
    """Raised when the directed part of a graph contains a cycle."""

    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        super().__init__("directed cycle: " + " -> ".join(self.cycle + (self.cycle[0],)))


class UnknownNodeError(GraphError):
    """Raised when a query mentions a node that is not in the graph."""


def _canonical_pair(a, b):
    return (a, b) if a <= b else (b, a)


class Admg:
    """An acyclic directed mixed graph over named nodes.

    Nodes are opaque strings kept in lexicographic order so that every
    derived ordering (topological sorts, component listings, renderings)
    is reproducible.  Directed edges are (tail, head) pairs; bidirected
    edges are stored as canonical sorted pairs.  Self loops are rejected
    in both edge sets and the directed part is checked for acyclicity at
    construction time, so every Admg instance is valid thereafter.
    """

    __slots__ = ("nodes", "directed", "bidirected", "_parents", "_children",
                 "_siblings", "_topo", "_hash")

    def __init__(self, nodes: Iterable[str], directed: Iterable[Tuple[str, str]] = (),
                 bidirected: Iterable[Tuple[str, str]] = ()):
        self.nodes: Tuple[str, ...] = tuple(sorted(set(nodes)))
        node_set = set(self.nodes)

        dir_edges = set()
        for tail, head in directed:
            if tail not in node_set or head not in node_set:
                raise UnknownNodeError(f"edge {tail} -> {head} has an endpoint outside the node set")
            if tail == head:
                raise GraphError(f"self loop {tail} -> {head}")
            dir_edges.add((tail, head))
        self.directed: FrozenSet[Tuple[str, str]] = frozenset(dir_edges)

        bi_edges = set()
        for a, b in bidirected:
            if a not in node_set or b not in node_set:
                raise UnknownNodeError(f"edge {a} <-> {b} has an endpoint outside the node set")
            if a == b:
                raise GraphError(f"self loop {a} <-> {b}")
            bi_edges.add(_canonical_pair(a, b))
        self.bidirected: FrozenSet[Tuple[str, str]] = frozenset(bi_edges)

        self._parents = {v: set() for v in self.nodes}
        self._children = {v: set() for v in self.nodes}
        for tail, head in self.directed:
            self._parents[head].add(tail)
            self._children[tail].add(head)
        self._siblings = {v: set() for v in self.nodes}
        for a, b in self.bidirected:
            self._siblings[a].add(b)
            self._siblings[b].add(a)

        self._topo = self._kahn_order()
        self._hash = hash((self.nodes, self.directed, self.bidirected))

    def _kahn_order(self):
        # Kahn's algorithm with a lexicographic tie break; raises CycleError
        # carrying one shortest cycle if the directed part is cyclic.
        in_degree = {v: len(self._parents[v]) for v in self.nodes}
        ready = sorted(v for v in self.nodes if in_degree[v] == 0)
        order = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            opened = []
            for ch in self._children[v]:
                in_degree[ch] -= 1
                if in_degree[ch] == 0:
                    opened.append(ch)
            if opened:
                ready = sorted(ready + opened)
        if len(order) != len(self.nodes):
            raise CycleError(self._find_cycle())
        return tuple(order)

    def _find_cycle(self):
        # Shortest directed cycle by BFS from each node back to itself.
        best = None
        for start in self.nodes:
            prev = {start: None}
            queue = deque([start])
            found = None
            while queue and found is None:
                v = queue.popleft()
                for ch in sorted(self._children[v]):
                    if ch == start:
                        found = v
                        break
                    if ch not in prev:
                        prev[ch] = v
                        queue.append(ch)
            if found is not None:
                cycle = [found]
                while prev[cycle[-1]] is not None:
                    cycle.append(prev[cycle[-1]])
                cycle.reverse()
                if best is None or len(cycle) < len(best):
                    best = cycle
        return best

    # -- basic protocol -------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Admg):
            return NotImplemented
        return (self.nodes == other.nodes and self.directed == other.directed
                and self.bidirected == other.bidirected)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return (f"Admg(nodes={list(self.nodes)}, directed={sorted(self.directed)}, "
                f"bidirected={sorted(self.bidirected)})")

    def _check_members(self, s):
        s = frozenset(s)
        unknown = s - set(self.nodes)
        if unknown:
            raise UnknownNodeError(f"unknown node(s): {sorted(unknown)}")
        return s

    # -- kinship --------------------------------------------------------

    def parents(self, s: Iterable[str]) -> FrozenSet[str]:
        """Union of directed-edge tails into members of ``s``."""
        s = self._check_members(s)
        out = set()
        for v in s:
            out |= self._parents[v]
        return frozenset(out)

    def children(self, s: Iterable[str]) -> FrozenSet[str]:
        s = self._check_members(s)
        out = set()
        for v in s:
            out |= self._children[v]
        return frozenset(out)

    def ancestors(self, s: Iterable[str]) -> FrozenSet[str]:
        """Transitive closure of parents, excluding ``s`` itself."""
        s = self._check_members(s)
        seen = set(s)
        frontier = set(s)
        while frontier:
            nxt = set()
            for v in frontier:
                nxt |= self._parents[v] - seen
            seen |= nxt
            frontier = nxt
        return frozenset(seen - s)

    def descendants(self, s: Iterable[str]) -> FrozenSet[str]:
        s = self._check_members(s)
        seen = set(s)
        frontier = set(s)
        while frontier:
            nxt = set()
            for v in frontier:
                nxt |= self._children[v] - seen
            seen |= nxt
            frontier = nxt
        return frozenset(seen - s)

    def ancestral_closure(self, s: Iterable[str]) -> FrozenSet[str]:
        """``s`` together with all its ancestors (a closed set under ancestors)."""
        s = self._check_members(s)
        return frozenset(s | self.ancestors(s))

    def topological_order(self) -> Tuple[str, ...]:
        """Deterministic topological order (Kahn, lexicographic tie break)."""
        return self._topo

    # -- surgery ----------------------------------------------------------

    def mutilate(self, cut_into: Iterable[str] = (), cut_out_of: Iterable[str] = ()) -> "Admg":
        """Remove edges with an arrowhead at ``cut_into`` and directed edges
        with a tail in ``cut_out_of``.

        Arrowheads at a node are directed heads and both ends of incident
        bidirected edges, so bidirected edges touching ``cut_into`` go away
        while ``cut_out_of`` leaves them alone.
        """
        into = self._check_members(cut_into)
        out_of = self._check_members(cut_out_of)
        directed = [(t, h) for t, h in self.directed if h not in into and t not in out_of]
        bidirected = [(a, b) for a, b in self.bidirected if a not in into and b not in into]
        return Admg(self.nodes, directed, bidirected)

    def induced(self, keep: Iterable[str]) -> "Admg":
        """Induced subgraph over ``keep``."""
        keep = self._check_members(keep)
        directed = [(t, h) for t, h in self.directed if t in keep and h in keep]
        bidirected = [(a, b) for a, b in self.bidirected if a in keep and b in keep]
        return Admg(sorted(keep), directed, bidirected)

    # -- components -------------------------------------------------------

    def c_components(self) -> Tuple[FrozenSet[str], ...]:
        """Connected components of the bidirected-edge skeleton.

        Nodes without bidirected edges form singleton components.  The
        result is ordered by the smallest member of each component.
        """
        seen = set()
        comps = []
        for v in self.nodes:
            if v in seen:
                continue
            comp = {v}
            frontier = [v]
            while frontier:
                u = frontier.pop()
                for w in self._siblings[u]:
                    if w not in comp:
                        comp.add(w)
                        frontier.append(w)
            seen |= comp
            comps.append(frozenset(comp))
        comps.sort(key=lambda c: min(c))
        return tuple(comps)

    def c_component_of(self, v: str) -> FrozenSet[str]:
        for comp in self.c_components():
            if v in comp:
                return comp
        raise UnknownNodeError(f"unknown node: {v}")

    # -- separation -------------------------------------------------------

    def m_separated(self, x: Iterable[str], y: Iterable[str], z: Iterable[str] = ()) -> bool:
        """Test whether every path between ``x`` and ``y`` is blocked by ``z``.

        Bidirected edges act as segments with arrowheads at both ends.  A
        collider on a path is active iff it or one of its descendants is in
        ``z``; a non-collider is active iff it is not in ``z``.  Implemented
        as Bayes-ball style reachability over (node, arrived-by-arrowhead)
        states, which is linear in the number of edges.
        """
        x = self._check_members(x)
        y = self._check_members(y)
        z = self._check_members(z)
        if x & y or x & z or y & z:
            raise GraphError("query sets must be pairwise disjoint")
        if not x or not y:
            return True

        # Nodes that unblock a collider: z and all its ancestors.
        collider_open = z | self.ancestors(z)

        # State (v, True) means v was entered through an arrowhead at v,
        # (v, False) through a tail at v.
        queue = deque()
        visited = set()

        def push(node, by_head):
            if node in y:
                return True
            if (node, by_head) not in visited:
                visited.add((node, by_head))
                queue.append((node, by_head))
            return False

        for s in x:
            for ch in self._children[s]:
                if push(ch, True):
                    return False
            for pa in self._parents[s]:
                if push(pa, False):
                    return False
            for sib in self._siblings[s]:
                if push(sib, True):
                    return False

        while queue:
            v, by_head = queue.popleft()
            if by_head:
                if v not in z:
                    # pass through as a non-collider, leaving by a tail
                    for ch in self._children[v]:
                        if push(ch, True):
                            return False
                if v in collider_open:
                    # bounce as a collider, leaving by an arrowhead
                    for pa in self._parents[v]:
                        if push(pa, False):
                            return False
                    for sib in self._siblings[v]:
                        if push(sib, True):
                            return False
            else:
                if v in z:
                    continue
                for ch in self._children[v]:
                    if push(ch, True):
                        return False
                for pa in self._parents[v]:
                    if push(pa, False):
                        return False
                for sib in self._siblings[v]:
                    if push(sib, True):
                        return False
        return True


def m_separated_brute_force(g: Admg, x, y, z=()) -> bool:
    """Exhaustive path-enumeration test of m-separation.

    Enumerates every node-simple path between ``x`` and ``y`` (including
    the choice between parallel directed and bidirected edges) and checks
    the active-vertex rules directly.  Exponential; intended as an
    independent oracle for small graphs.
    """
    x = g._check_members(x)
    y = g._check_members(y)
    z = g._check_members(z)
    if x & y or x & z or y & z:
        raise GraphError("query sets must be pairwise disjoint")
    collider_open = z | g.ancestors(z)

    # Each step is (node, head_at_prev, head_at_node) for the edge walked.
    def edges_from(v):
        for ch in sorted(g._children[v]):
            yield ch, False, True
        for pa in sorted(g._parents[v]):
            yield pa, True, False
        for sib in sorted(g._siblings[v]):
            yield sib, True, True

    def active_interior(v, head_in, head_out):
        if head_in and head_out:
            return v in collider_open
        return v not in z

    def dfs(v, head_at_v, on_path):
        for w, head_back, head_fwd in edges_from(v):
            if w in on_path:
                continue
            # v is interior here: arrived with head_at_v, leaving with
            # an edge whose v-end is a head iff head_back
            if not active_interior(v, head_at_v, head_back):
                continue
            if w in y:
                return True
            if w in x or w in on_path:
                continue
            if dfs(w, head_fwd, on_path | {w}):
                return True
        return False

    for s in sorted(x):
        for w, _, head_fwd in edges_from(s):
            if w in y:
                return False
            if w in x:
                continue
            if dfs(w, head_fwd, frozenset({s, w})):
                return False
    return True
