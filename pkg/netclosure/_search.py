# Copyright (C) 2024 netclosure contributors. All rights reserved.

import logging
import sys
from typing import List, Optional, Sequence, Tuple

import numpy as np
import torch

from .digraph import members, popcount

__all__ = [
    'to_bitsets',
    'greedy_clique_cover',
    'max_independent_set',
    'dsatur_coloring',
    'exact_coloring',
]

logger = logging.getLogger(__name__)


def to_bitsets(adjacency: torch.Tensor) -> List[int]:
    """Packs each row of a boolean adjacency matrix into a Python int."""
    packed = np.packbits(adjacency.cpu().numpy().astype(np.uint8), axis=1, bitorder='little')
    return [int.from_bytes(row.tobytes(), 'little') for row in packed]


def greedy_clique_cover(rows: Sequence[int]) -> List[int]:
    """Partitions the vertices into cliques, highest degree first."""
    n = len(rows)
    order = sorted(range(n), key=lambda v: (-popcount(rows[v]), v))
    uncovered = (1 << n) - 1
    cells = []
    for v in order:
        if not (uncovered >> v) & 1:
            continue
        cell = 1 << v
        candidates = rows[v] & uncovered
        for u in order:
            if (candidates >> u) & 1:
                cell |= 1 << u
                candidates &= rows[u]
        uncovered &= ~cell
        cells.append(cell)
    return cells


def max_independent_set(
    rows: Sequence[int],
    cells: Optional[Sequence[int]] = None,
    initial: Sequence[int] = (),
    upper_bound: Optional[int] = None,
) -> List[int]:
    """Exact maximum independent set by branch and bound on bitsets.

    ``cells`` must partition the vertices into cliques; an independent set
    meets each cell at most once, which gives the bound. Vertices in
    ``initial`` are forced into the solution. The search stops as soon as
    ``upper_bound`` is reached.
    """
    n = len(rows)
    if cells is None:
        cells = greedy_clique_cover(rows)
    limit = len(cells) if upper_bound is None else min(upper_bound, len(cells))

    start = (1 << n) - 1
    chain = None
    for v in initial:
        assert (start >> v) & 1, "initial vertices must be independent"
        start &= ~(rows[v] | (1 << v))
        chain = (v, chain)

    best_count = -1
    best_chain = None
    stack = [(start, len(initial), chain)]
    nodes = 0
    while stack:
        P, count, chain = stack.pop()
        nodes += 1
        # vertices without neighbours left can always be taken
        for v in members(P):
            if rows[v] & P == 0:
                P &= ~(1 << v)
                count += 1
                chain = (v, chain)
        if count > best_count:
            best_count, best_chain = count, chain
            if best_count >= limit:
                break
        if P == 0:
            continue
        live = [c & P for c in cells if c & P]
        if count + len(live) <= best_count:
            continue
        cell = min(live, key=lambda c: (popcount(c), c & -c))
        stack.append((P & ~cell, count, chain))
        for v in reversed(members(cell)):
            stack.append((P & ~rows[v] & ~cell, count + 1, (v, chain)))

    logger.debug("Independent set search: %d vertices, %d nodes, size %d", n, nodes, best_count)
    result = []
    while best_chain is not None:
        v, best_chain = best_chain
        result.append(v)
    return sorted(result)


def dsatur_coloring(rows: Sequence[int]) -> List[int]:
    """Greedy DSATUR colouring; returns a colour per vertex."""
    n = len(rows)
    colors = [-1] * n
    saturation = [0] * n
    degree = [popcount(r) for r in rows]
    for _ in range(n):
        v = max(
            (u for u in range(n) if colors[u] < 0),
            key=lambda u: (popcount(saturation[u]), degree[u], -u))
        c = 0
        while (saturation[v] >> c) & 1:
            c += 1
        colors[v] = c
        for u in members(rows[v]):
            saturation[u] |= 1 << c
    return colors


def exact_coloring(rows: Sequence[int], lower: int, coloring: Sequence[int]) -> Tuple[int, List[int]]:
    """Minimum colouring by DSATUR backtracking.

    Starts from the proper ``coloring`` and stops once ``lower`` colours
    are reached.
    """
    n = len(rows)
    best = [max(coloring) + 1 if n else 0, list(coloring)]
    if best[0] <= lower:
        return best[0], best[1]
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 2 * n + 1000))
    colors = [-1] * n
    counts = [[0] * n for _ in range(n)]
    saturation = [0] * n

    def assign(v: int, c: int, sign: int) -> None:
        for u in members(rows[v]):
            counts[u][c] += sign
            if sign > 0:
                saturation[u] |= 1 << c
            elif counts[u][c] == 0:
                saturation[u] &= ~(1 << c)

    def search(colored: int, used: int) -> bool:
        if used >= best[0]:
            return False
        if colored == n:
            best[0], best[1] = used, list(colors)
            return used <= lower
        v = max(
            (u for u in range(n) if colors[u] < 0),
            key=lambda u: (popcount(saturation[u]), popcount(rows[u]), -u))
        for c in range(min(used + 1, best[0] - 1)):
            if (saturation[v] >> c) & 1:
                continue
            colors[v] = c
            assign(v, c, 1)
            done = search(colored + 1, max(used, c + 1))
            assign(v, c, -1)
            colors[v] = -1
            if done:
                return True
        return False

    search(0, 0)
    return best[0], best[1]
