# Copyright (C) 2024 netclosure contributors. All rights reserved.

import logging
from functools import cached_property
from typing import FrozenSet, Iterable, Iterator, List, Optional, Text, Tuple

import networkx as nx

from .config import DEFAULT_LIMITS, Limits
from .errors import FormatError, InvariantError, SizeLimitError

__all__ = [
    'VertexSet',
    'Digraph',
    'popcount',
    'members',
    'vertex_set',
    'c_step',
    'd_closure',
    'is_acyclic',
    'max_acyclic_set',
    'mias',
    'rank_of',
    'strongly_connected_components',
    'is_strongly_connected',
    'induced_subgraph',
    'remove_vertices',
    'girth',
    'chordless_cycles',
    'chordless_vertices',
    'disjoint_union',
    'unidirectional_union',
    'bidirectional_union',
    'blowup',
    'neighbourhood_lemma_holds',
    'directed_cycle',
    'bidirectional_clique',
    'undirected_cycle',
    'edgeless',
    'looped',
    'from_undirected',
    'from_text',
    'to_text',
    'load_digraph',
]

logger = logging.getLogger(__name__)

# Subsets of [0, n) are Python ints; bit v stands for vertex v.
VertexSet = int

Arc = Tuple[int, int]


def popcount(x: VertexSet) -> int:
    return bin(x).count('1')


def members(x: VertexSet) -> List[int]:
    result = []
    v = 0
    while x:
        if x & 1:
            result.append(v)
        x >>= 1
        v += 1
    return result


def vertex_set(vertices: Iterable[int]) -> VertexSet:
    x = 0
    for v in vertices:
        x |= 1 << v
    return x


class Digraph:
    """Directed graph on vertices 0..n-1 with optional loops.

    Arcs are kept as a sorted tuple; in- and out-neighbourhoods are
    precomputed as bit masks.
    """

    def __init__(self, n: int, arcs: Iterable[Arc] = (), limits: Limits = DEFAULT_LIMITS) -> None:
        if n < 1:
            raise InvariantError("vertex count must be positive", f"n = {n}")
        if n > limits.max_digraph_vertices:
            raise SizeLimitError("digraph vertex count", n, limits.max_digraph_vertices)
        arc_set = set()
        for u, v in arcs:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise InvariantError("arc endpoints must lie in [0, n)", f"({u}, {v}) with n = {n}")
            arc_set.add((u, v))
        self.n = n
        self.arcs: Tuple[Arc, ...] = tuple(sorted(arc_set))
        in_masks = [0] * n
        out_masks = [0] * n
        for u, v in self.arcs:
            out_masks[u] |= 1 << v
            in_masks[v] |= 1 << u
        self.in_masks: Tuple[int, ...] = tuple(in_masks)
        self.out_masks: Tuple[int, ...] = tuple(out_masks)
        self.full: VertexSet = (1 << n) - 1
        self.loops: VertexSet = vertex_set(u for u, v in self.arcs if u == v)

    def has_loop(self, v: int) -> bool:
        return (self.loops >> v) & 1 == 1

    @property
    def arc_set(self) -> FrozenSet[Arc]:
        return frozenset(self.arcs)

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.arcs)
        return g

    @cached_property
    def graph(self) -> nx.DiGraph:
        """Shared read-only networkx view; use ``to_networkx`` for a copy."""
        return nx.freeze(self.to_networkx())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Digraph):
            return NotImplemented
        return self.n == other.n and self.arcs == other.arcs

    def __hash__(self) -> int:
        return hash((self.n, self.arcs))

    def __repr__(self) -> str:
        return f"Digraph(n={self.n}, arcs={list(self.arcs)})"


def c_step(D: Digraph, X: VertexSet) -> VertexSet:
    """Adds every vertex whose in-neighbourhood lies inside ``X``."""
    result = X
    for v in range(D.n):
        if D.in_masks[v] & ~X == 0:
            result |= 1 << v
    return result


def d_closure(D: Digraph, X: VertexSet) -> VertexSet:
    while True:
        Y = c_step(D, X)
        if Y == X:
            return X
        X = Y


def is_acyclic(D: Digraph, X: Optional[VertexSet] = None) -> bool:
    """True when the subgraph induced by ``X`` (default V) has no cycle."""
    g = D.graph if X is None else D.graph.subgraph(members(X))
    return nx.is_directed_acyclic_graph(g)


def _max_acyclic_in(D: Digraph, component: VertexSet) -> VertexSet:
    candidates = [v for v in members(component) if not D.has_loop(v)]
    # Vertices with many arcs inside the component go first.
    candidates.sort(key=lambda v: (-popcount((D.in_masks[v] | D.out_masks[v]) & component), v))
    best = [0, 0]

    def search(i: int, chosen: VertexSet, count: int) -> None:
        if count + len(candidates) - i <= best[0]:
            return
        if i == len(candidates):
            best[0], best[1] = count, chosen
            return
        v = candidates[i]
        extended = chosen | (1 << v)
        if is_acyclic(D, extended):
            search(i + 1, extended, count + 1)
        search(i + 1, chosen, count)

    search(0, 0, 0)
    return best[1]


def max_acyclic_set(D: Digraph) -> VertexSet:
    """A largest vertex set inducing an acyclic subgraph.

    Cycles never leave a strongly connected component, so components are
    solved independently and the results are combined.
    """
    result = 0
    for component in strongly_connected_components(D):
        if popcount(component) == 1 and not D.has_loop(members(component)[0]):
            result |= component
        else:
            result |= _max_acyclic_in(D, component)
    assert is_acyclic(D, result)
    return result


def mias(D: Digraph) -> int:
    return popcount(max_acyclic_set(D))


def rank_of(D: Digraph) -> int:
    return D.n - mias(D)


def strongly_connected_components(D: Digraph) -> List[VertexSet]:
    components = [vertex_set(c) for c in nx.strongly_connected_components(D.graph)]
    components.sort(key=lambda c: (c & -c))
    return components


def is_strongly_connected(D: Digraph) -> bool:
    return nx.is_strongly_connected(D.graph)


def induced_subgraph(D: Digraph, X: VertexSet, limits: Limits = DEFAULT_LIMITS) -> Tuple[Digraph, List[int]]:
    """Subgraph induced by ``X``, relabeled to 0..|X|-1 in increasing order.

    Returns the digraph and the list mapping new indices to old ones.
    """
    kept = members(X)
    index = {v: i for i, v in enumerate(kept)}
    arcs = [(index[u], index[v]) for u, v in D.arcs if u in index and v in index]
    return Digraph(len(kept), arcs, limits), kept


def remove_vertices(D: Digraph, X: VertexSet, limits: Limits = DEFAULT_LIMITS) -> Tuple[Digraph, List[int]]:
    return induced_subgraph(D, D.full & ~X, limits)


def girth(D: Digraph) -> int:
    """Length of a shortest cycle; a loop counts 1 and a bidirectional edge 2.

    Returns 0 for acyclic digraphs.
    """
    if D.loops:
        return 1
    best = 0
    for source, lengths in nx.all_pairs_shortest_path_length(D.graph):
        for u in members(D.in_masks[source]):
            if u in lengths:
                cycle = lengths[u] + 1
                if best == 0 or cycle < best:
                    best = cycle
    return best


def chordless_cycles(D: Digraph) -> Iterator[VertexSet]:
    """Yields the vertex set of every chordless cycle.

    A cycle is chordless when its vertex set induces exactly its own arcs;
    a loop is a chordless cycle of length 1 and a bidirectional edge one of
    length 2.
    """
    for cycle in nx.chordless_cycles(D.graph):
        yield vertex_set(cycle)


def chordless_vertices(D: Digraph) -> VertexSet:
    """T(D): the vertices lying on no chordless cycle."""
    covered = 0
    for cycle in chordless_cycles(D):
        covered |= cycle
    return D.full & ~covered


def _union(D1: Digraph, D2: Digraph, forward: bool, backward: bool, limits: Limits) -> Digraph:
    n1, n2 = D1.n, D2.n
    arcs = list(D1.arcs)
    arcs.extend((u + n1, v + n1) for u, v in D2.arcs)
    if forward:
        arcs.extend((u, v + n1) for u in range(n1) for v in range(n2))
    if backward:
        arcs.extend((v + n1, u) for u in range(n1) for v in range(n2))
    return Digraph(n1 + n2, arcs, limits)


def disjoint_union(D1: Digraph, D2: Digraph, limits: Limits = DEFAULT_LIMITS) -> Digraph:
    return _union(D1, D2, False, False, limits)


def unidirectional_union(D1: Digraph, D2: Digraph, limits: Limits = DEFAULT_LIMITS) -> Digraph:
    """Adds every arc from V1 to V2."""
    return _union(D1, D2, True, False, limits)


def bidirectional_union(D1: Digraph, D2: Digraph, limits: Limits = DEFAULT_LIMITS) -> Digraph:
    return _union(D1, D2, True, True, limits)


def blowup(D: Digraph, k: int, limits: Limits = DEFAULT_LIMITS) -> Digraph:
    """D^[k] on V x [k]; vertex (v, i) has index v * k + i."""
    if k < 1:
        raise InvariantError("blow-up factor must be positive", f"k = {k}")
    if D.n * k > limits.max_digraph_vertices:
        raise SizeLimitError("blow-up vertex count", D.n * k, limits.max_digraph_vertices)
    arcs = [
        (u * k + i, v * k + j)
        for u, v in D.arcs
        for i in range(k)
        for j in range(k)
    ]
    return Digraph(D.n * k, arcs, limits)


def neighbourhood_lemma_holds(D: Digraph, v: int, X: VertexSet) -> bool:
    """Checks v in cl(X) <=> cl(v-) subset of cl(X) for loopless v outside X."""
    assert not D.has_loop(v) and not (X >> v) & 1
    closure = d_closure(D, X)
    lhs = (closure >> v) & 1 == 1
    rhs = d_closure(D, D.in_masks[v]) & ~closure == 0
    return lhs == rhs


def directed_cycle(n: int) -> Digraph:
    return Digraph(n, [(v, (v + 1) % n) for v in range(n)])


def bidirectional_clique(n: int) -> Digraph:
    return Digraph(n, [(u, v) for u in range(n) for v in range(n) if u != v])


def undirected_cycle(n: int) -> Digraph:
    return from_undirected(n, [(v, (v + 1) % n) for v in range(n)])


def edgeless(n: int) -> Digraph:
    return Digraph(n)


def looped(n: int) -> Digraph:
    return Digraph(n, [(v, v) for v in range(n)])


def from_undirected(n: int, edges: Iterable[Arc]) -> Digraph:
    arcs = []
    for u, v in edges:
        arcs.append((u, v))
        arcs.append((v, u))
    return Digraph(n, arcs)


def from_text(text: Text, limits: Limits = DEFAULT_LIMITS) -> Digraph:
    n = None
    arcs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != 'digraph':
                raise FormatError("expected header 'digraph <n>'", lineno)
            try:
                n = int(parts[1])
            except ValueError:
                raise FormatError(f"invalid vertex count {parts[1]!r}", lineno)
            continue
        if len(parts) != 2:
            raise FormatError(f"expected '<u> <v>', got {line!r}", lineno)
        try:
            arcs.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise FormatError(f"invalid arc {line!r}", lineno)
    if n is None:
        raise FormatError("missing header 'digraph <n>'")
    return Digraph(n, arcs, limits)


def to_text(D: Digraph) -> Text:
    lines = [f"digraph {D.n}"]
    lines.extend(f"{u} {v}" for u, v in D.arcs)
    return '\n'.join(lines) + '\n'


def load_digraph(path: Text, limits: Limits = DEFAULT_LIMITS) -> Digraph:
    with open(path) as f:
        return from_text(f.read(), limits)
