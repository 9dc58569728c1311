# Copyright (C) 2024 netclosure contributors. All rights reserved.

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

from tqdm import tqdm

from .closure import from_digraph, is_weak
from .config import DEFAULT_LIMITS, Limits
from .digraph import (
    Digraph,
    VertexSet,
    chordless_vertices,
    d_closure,
    is_acyclic,
    is_strongly_connected,
    members,
    remove_vertices,
    vertex_set,
)
from .errors import InvariantError, SizeLimitError

__all__ = [
    'ReductionStep',
    'ReductionTrace',
    'is_singleton_useless',
    'singleton_witnesses',
    'remove_useless_part',
    'brute_largest_useless',
]

logger = logging.getLogger(__name__)


@dataclass
class ReductionStep:
    """One removed vertex with the closures that justified it.

    ``witnesses`` pairs every out-neighbour u with cl(u^- minus the vertex);
    all vertex numbers are those of the input digraph.
    """
    vertex: int
    witnesses: List[Tuple[int, List[int]]]

    def to_json(self) -> Dict[str, Any]:
        return {
            'vertex': self.vertex,
            'witnesses': [{'out_neighbour': u, 'closure': closure} for u, closure in self.witnesses],
        }


@dataclass
class ReductionTrace:
    removed: List[int] = field(default_factory=list)
    steps: List[ReductionStep] = field(default_factory=list)
    remaining: List[int] = field(default_factory=list)

    @property
    def removed_set(self) -> VertexSet:
        return vertex_set(self.removed)

    def to_json(self) -> Dict[str, Any]:
        return {
            'removed': list(self.removed),
            'steps': [step.to_json() for step in self.steps],
            'remaining': list(self.remaining),
        }


def singleton_witnesses(D: Digraph, v: int) -> List[Tuple[int, VertexSet]]:
    """(u, cl(u^- minus v)) for every out-neighbour u of v."""
    if D.has_loop(v):
        raise InvariantError("vertex must not carry a loop", f"v = {v}")
    bit = 1 << v
    return [(u, d_closure(D, D.in_masks[u] & ~bit)) for u in members(D.out_masks[v])]


def is_singleton_useless(D: Digraph, v: int) -> bool:
    """{v} is useless iff v lies in cl(u^- minus v) for every out-neighbour u."""
    return all((closure >> v) & 1 for _, closure in singleton_witnesses(D, v))


def remove_useless_part(D: Digraph, limits: Limits = DEFAULT_LIMITS) -> Tuple[Digraph, ReductionTrace]:
    """Removes useless vertices one at a time until none is left.

    Candidates are the vertices on no chordless cycle, scanned in increasing
    order; the scan restarts after every removal.
    """
    if D.loops:
        raise InvariantError("reduction needs a loopless digraph", f"loops at {members(D.loops)}")
    if not is_strongly_connected(D):
        raise InvariantError("reduction needs a strongly connected digraph")

    trace = ReductionTrace()
    current, labels = D, list(range(D.n))
    while current.n > 1:
        for v in members(chordless_vertices(current)):
            witnesses = singleton_witnesses(current, v)
            if all((closure >> v) & 1 for _, closure in witnesses):
                break
        else:
            break
        vertex = labels[v]
        trace.removed.append(vertex)
        trace.steps.append(ReductionStep(
            vertex, [(labels[u], [labels[w] for w in members(closure)]) for u, closure in witnesses]))
        logger.debug("Removed useless vertex %d", vertex)
        current, kept = remove_vertices(current, 1 << v, limits)
        labels = [labels[i] for i in kept]

    trace.remaining = labels
    logger.info("Removed %d useless vertices out of %d", len(trace.removed), D.n)
    return current, trace


def brute_largest_useless(D: Digraph, limits: Limits = DEFAULT_LIMITS) -> VertexSet:
    """Union of every nonempty proper subset that is weak for cl_D and
    induces an acyclic subgraph, by exhaustive search."""
    if D.n > limits.max_brute_vertices:
        raise SizeLimitError("brute-force useless search vertices", D.n, limits.max_brute_vertices)
    cl = from_digraph(D, limits)
    loops = cl(0)
    result = 0
    for V2 in tqdm(range(1, D.full), desc="useless sets", disable=None, leave=False):
        if V2 & ~result == 0 or cl(V2) & ~V2 != loops & ~V2:
            continue
        if is_acyclic(D, V2) and is_weak(cl, V2):
            result |= V2
    return result
