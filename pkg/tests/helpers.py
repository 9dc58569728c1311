# Copyright (C) 2024 netclosure contributors. All rights reserved.

import itertools
import random
from typing import Iterator, List, Tuple

import torch

from netclosure.digraph import Digraph, is_strongly_connected

FIG2_ARCS = [(0, 1), (1, 0), (0, 2), (2, 1)]
FIG3_ARCS = [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1), (0, 3), (1, 3), (3, 4), (4, 2)]


def fig2() -> Digraph:
    return Digraph(3, FIG2_ARCS)


def fig3() -> Digraph:
    return Digraph(5, FIG3_ARCS)


def possible_arcs(n: int, loops: bool = False) -> List[Tuple[int, int]]:
    return [(u, v) for u in range(n) for v in range(n) if loops or u != v]


def all_digraphs(n: int, loops: bool = False) -> Iterator[Digraph]:
    arcs = possible_arcs(n, loops)
    for mask in range(1 << len(arcs)):
        yield Digraph(n, [a for i, a in enumerate(arcs) if (mask >> i) & 1])


def digraphs_up_to_isomorphism(n: int) -> List[Digraph]:
    """One loopless digraph per isomorphism class.

    Arc sets are bit masks over ``possible_arcs(n)``; the representative is
    the smallest mask over all relabellings.
    """
    arcs = possible_arcs(n)
    index = {a: i for i, a in enumerate(arcs)}
    masks = torch.arange(1 << len(arcs), dtype=torch.int64)
    canonical = masks.clone()
    for perm in itertools.permutations(range(n)):
        relabelled = torch.zeros_like(masks)
        for i, (u, v) in enumerate(arcs):
            relabelled |= ((masks >> i) & 1) << index[(perm[u], perm[v])]
        canonical = torch.minimum(canonical, relabelled)
    return [
        Digraph(n, [a for i, a in enumerate(arcs) if (mask >> i) & 1])
        for mask in torch.unique(canonical).tolist()
    ]


def random_digraph(rng: random.Random, n: int, p: float = 0.4, loops: bool = False) -> Digraph:
    return Digraph(n, [a for a in possible_arcs(n, loops) if rng.random() < p])


def strongly_connected_digraphs(rng: random.Random, n: int, count: int, p: float = 0.4) -> List[Digraph]:
    found: List[Digraph] = []
    while len(found) < count:
        D = random_digraph(rng, n, p)
        if is_strongly_connected(D):
            found.append(D)
    return found
