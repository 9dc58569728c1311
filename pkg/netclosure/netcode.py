# Copyright (C) 2024 netclosure contributors. All rights reserved.

import itertools
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Text, Tuple

import networkx as nx
from tqdm import tqdm

from .closure import from_digraph
from .config import DEFAULT_LIMITS, Limits
from .digraph import Digraph, members, popcount
from .errors import FormatError, InvariantError, SizeLimitError
from .partition import CodingFunction, index_word
from .solvegraph import Certificate, certify

__all__ = [
    'NetworkInstance',
    'NetworkSolution',
    'Protocol',
    'to_guessing_digraph',
    'solve_network',
    'instantiate_functions',
    'verify_protocol',
    'verify_network_solution',
    'protocol_guessing_oracle',
    'best_protocol',
    'load_network',
]

logger = logging.getLogger(__name__)

MAX_PROTOCOL_COMBINATIONS = 2 ** 20

Arc = Tuple[int, int]


class NetworkInstance:
    """Multiple-unicast network in circuit representation.

    Node ids run over 0..2r+m-1: sources 0..r-1, sinks r..2r-1 (sink r+i
    demands the message of source i), then the m intermediate nodes.
    """

    def __init__(self, r: int, m: int, arcs: Iterable[Arc], labels: Optional[Dict[Text, List[int]]] = None) -> None:
        self.r = r
        self.m = m
        self.arcs: Tuple[Arc, ...] = tuple(sorted({(int(u), int(v)) for u, v in arcs}))
        self.labels = labels
        self._validate()

    @property
    def num_nodes(self) -> int:
        return 2 * self.r + self.m

    @property
    def sources(self) -> List[int]:
        return list(range(self.r))

    @property
    def sinks(self) -> List[int]:
        return list(range(self.r, 2 * self.r))

    @property
    def intermediates(self) -> List[int]:
        return list(range(2 * self.r, self.num_nodes))

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.num_nodes))
        g.add_edges_from(self.arcs)
        return g

    def in_neighbours(self, node: int) -> Tuple[int, ...]:
        return tuple(u for u, v in self.arcs if v == node)

    def _validate(self) -> None:
        if self.r < 1:
            raise InvariantError("network needs at least one source", f"r = {self.r}")
        if self.m < 0:
            raise InvariantError("intermediate count must be non-negative", f"m = {self.m}")
        for u, v in self.arcs:
            if not (0 <= u < self.num_nodes and 0 <= v < self.num_nodes):
                raise InvariantError("node ids lie in [0, 2r + m)", f"({u}, {v})")
            if u == v:
                raise InvariantError("links must join distinct nodes", f"({u}, {v})")
        g = self.to_networkx()
        if not nx.is_directed_acyclic_graph(g):
            raise InvariantError("network must be acyclic", f"cycle {nx.find_cycle(g)}")
        for s in self.sources:
            if g.in_degree(s):
                raise InvariantError("sources have in-degree 0", f"source {s}")
        for d in self.sinks:
            if g.out_degree(d):
                raise InvariantError("sinks have out-degree 0", f"sink {d}")
        for j in self.intermediates:
            if not g.out_degree(j):
                raise InvariantError("intermediate nodes need an outgoing link", f"node {j}")
        if self.labels is not None:
            if list(self.labels.get('sources', self.sources)) != self.sources:
                raise InvariantError("sources are numbered 0..r-1", f"got {self.labels['sources']}")
            if list(self.labels.get('sinks', self.sinks)) != self.sinks:
                raise InvariantError("sinks are numbered r..2r-1", f"got {self.labels['sinks']}")

    def to_json(self) -> Dict[str, Any]:
        return {
            'r': self.r,
            'm': self.m,
            'arcs': [list(arc) for arc in self.arcs],
            'labels': {'sources': self.sources, 'sinks': self.sinks},
        }

    @classmethod
    def from_json(cls, data: Any) -> "NetworkInstance":
        if not isinstance(data, dict):
            raise FormatError("network must be a JSON object")
        try:
            r, m = int(data['r']), int(data['m'])
            arcs = [(int(u), int(v)) for u, v in data['arcs']]
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"invalid network: {e!r}")
        labels = data.get('labels')
        if labels is not None and not isinstance(labels, dict):
            raise FormatError("labels must be an object with sources and sinks")
        return cls(r, m, arcs, labels)

    def __repr__(self) -> str:
        return f"NetworkInstance(r={self.r}, m={self.m}, arcs={list(self.arcs)})"


def load_network(path: Text) -> NetworkInstance:
    with open(path) as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise FormatError(e.msg, e.lineno)
    return NetworkInstance.from_json(data)


def _merged(N: NetworkInstance, node: int) -> int:
    """Digraph vertex of a network node: source i and sink r+i become i."""
    return node if node < N.r else node - N.r


def to_guessing_digraph(N: NetworkInstance, limits: Limits = DEFAULT_LIMITS) -> Digraph:
    arcs = [(_merged(N, u), _merged(N, v)) for u, v in N.arcs]
    D = Digraph(N.r + N.m, arcs, limits)
    assert len(D.arcs) == len(N.arcs)
    return D


@dataclass
class Protocol:
    """Local functions: node v maps the values at ``inputs[v]`` to its own."""
    q: int
    inputs: Dict[int, Tuple[int, ...]] = field(default_factory=dict)
    tables: Dict[int, Dict[Tuple[int, ...], int]] = field(default_factory=dict)

    def __call__(self, v: int, values: Tuple[int, ...]) -> Optional[int]:
        return self.tables[v].get(values)

    def fixed_points(self, n: int) -> List[int]:
        """Words x over [0, q)^n with f_v(x restricted to v^-) = x_v for all v."""
        result = []
        for index in range(self.q ** n):
            x = index_word(index, n, self.q)
            if all(self(v, tuple(x[u] for u in self.inputs[v])) == x[v] for v in range(n)):
                result.append(index)
        return result


@dataclass
class NetworkSolution:
    solvable: bool
    rank: int
    q: int
    reason: Text
    certificate: Optional[Certificate] = None

    @property
    def alpha(self) -> Optional[int]:
        return None if self.certificate is None else self.certificate.alpha

    @property
    def coding_function(self) -> Optional[CodingFunction]:
        return None if self.certificate is None else self.certificate.coding_function

    def to_json(self) -> Dict[str, Any]:
        if self.certificate is not None:
            data = self.certificate.to_json()
        else:
            data = {'alpha': None, 'rank': self.rank, 'q': self.q, 'solvable': self.solvable,
                    'witness_words': [], 'coding_function': None}
        data['reason'] = self.reason
        return data


def solve_network(N: NetworkInstance, q: int, limits: Limits = DEFAULT_LIMITS) -> NetworkSolution:
    """Solvable iff cl_D has rank r and is solvable over the alphabet."""
    D = to_guessing_digraph(N, limits)
    cl = from_digraph(D, limits)
    rank = cl.rank
    assert rank <= N.r, "the sources span the merged digraph"
    if rank < N.r:
        logger.info("Rank %d is below the %d sources", rank, N.r)
        return NetworkSolution(False, rank, q, "rank deficit")
    certificate = certify(cl, q, limits)
    reason = "solved" if certificate.solvable else "no coding function"
    return NetworkSolution(certificate.solvable, rank, q, reason, certificate)


def instantiate_functions(N: NetworkInstance, f: CodingFunction) -> Optional[Protocol]:
    """Per-node functions read off the kernels of ``f``.

    Base element b carries the source tuple (f_0(b), ..., f_{r-1}(b)); every
    intermediate node sends f of its merged vertex and sink r+i outputs the
    message of source i. Returns None when the source tuples do not cover
    the alphabet once each, or when some node output is not determined by
    its inputs.
    """
    q = f.q
    if f.n != N.r + N.m or f.r != N.r:
        raise InvariantError("coding function must match the network",
                             f"n = {f.n}, r = {f.r} for {N.r} sources and {N.m} intermediates")
    symbols = f.symbols.tolist()
    messages = [[symbols[_merged(N, node)][b] for b in range(f.base_size)] for node in range(N.num_nodes)]
    tuples = {tuple(messages[s][b] for s in N.sources) for b in range(f.base_size)}
    if len(tuples) != f.base_size:
        logger.debug("Source tuples repeat across the base set")
        return None

    protocol = Protocol(q)
    for node in N.intermediates + N.sinks:
        inputs = N.in_neighbours(node)
        table: Dict[Tuple[int, ...], int] = {}
        for b in range(f.base_size):
            key = tuple(messages[u][b] for u in inputs)
            if table.setdefault(key, messages[node][b]) != messages[node][b]:
                logger.debug("Node %d is not determined by its inputs %s", node, inputs)
                return None
        protocol.inputs[node] = inputs
        protocol.tables[node] = table
    return protocol


def verify_protocol(N: NetworkInstance, protocol: Protocol, exact: bool = False) -> bool:
    """Simulates the network on every source tuple.

    Each sink must output a value in bijection with the message of its
    source, or that message itself when ``exact``.
    """
    q = protocol.q
    order = [v for v in nx.topological_sort(N.to_networkx()) if v >= N.r]
    decoded: List[Dict[int, int]] = [{} for _ in range(N.r)]
    for x in itertools.product(range(q), repeat=N.r):
        messages = dict(enumerate(x))
        for node in order:
            if node not in protocol.tables:
                return False
            value = protocol(node, tuple(messages[u] for u in protocol.inputs[node]))
            if value is None:
                return False
            messages[node] = value
        for i, d in enumerate(N.sinks):
            out = messages[d]
            if exact and out != x[i]:
                return False
            if decoded[i].setdefault(x[i], out) != out:
                return False
    return all(len(set(decoding.values())) == q for decoding in decoded)


def verify_network_solution(N: NetworkInstance, f: CodingFunction, q: int, exact: bool = False) -> bool:
    if f.q != q:
        raise InvariantError("coding function alphabet must match q", f"{f.q} != {q}")
    protocol = instantiate_functions(N, f)
    if protocol is None:
        return False
    return verify_protocol(N, protocol, exact)


def _check_protocol_size(D: Digraph, q: int, limits: Limits) -> None:
    if D.n > limits.max_protocol_vertices:
        raise SizeLimitError("protocol oracle vertices", D.n, limits.max_protocol_vertices)
    in_degree = max(popcount(mask) for mask in D.in_masks)
    if in_degree > limits.max_protocol_in_degree:
        raise SizeLimitError("protocol oracle in-degree", in_degree, limits.max_protocol_in_degree)
    total = 1
    for mask in D.in_masks:
        total *= q ** (q ** popcount(mask))
    if total > MAX_PROTOCOL_COMBINATIONS:
        raise SizeLimitError("protocol combinations", total, MAX_PROTOCOL_COMBINATIONS)


def _local_functions(D: Digraph, v: int, q: int) -> Dict[int, Dict[Tuple[int, ...], int]]:
    """Every local function of v keyed by its set of fixed words, one per set."""
    inputs = tuple(members(D.in_masks[v]))
    keys = list(itertools.product(range(q), repeat=len(inputs)))
    words = [index_word(index, D.n, q) for index in range(q ** D.n)]
    found: Dict[int, Dict[Tuple[int, ...], int]] = {}
    for values in itertools.product(range(q), repeat=len(keys)):
        table = dict(zip(keys, values))
        fixed = 0
        for index, x in enumerate(words):
            if table[tuple(x[u] for u in inputs)] == x[v]:
                fixed |= 1 << index
        found.setdefault(fixed, table)
    return found


def best_protocol(D: Digraph, q: int, limits: Limits = DEFAULT_LIMITS) -> Tuple[int, Protocol]:
    """Protocol with the most fixed points, by exhaustive search."""
    _check_protocol_size(D, q, limits)
    choices = [list(_local_functions(D, v, q).items()) for v in range(D.n)]
    best_count, best_choice = -1, None
    for choice in tqdm(itertools.product(*choices), desc="protocols", disable=None, leave=False):
        fixed = (1 << q ** D.n) - 1
        for mask, _ in choice:
            fixed &= mask
        count = popcount(fixed)
        if count > best_count:
            best_count, best_choice = count, choice
    assert best_choice is not None
    protocol = Protocol(q)
    for v, (_, table) in enumerate(best_choice):
        protocol.inputs[v] = tuple(members(D.in_masks[v]))
        protocol.tables[v] = table
    return best_count, protocol


def protocol_guessing_oracle(D: Digraph, q: int, limits: Limits = DEFAULT_LIMITS) -> int:
    """max |Fix(f)| over all protocols f on D."""
    count, _ = best_protocol(D, q, limits)
    logger.debug("Protocol oracle: %d fixed points", count)
    return count

