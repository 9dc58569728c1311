# Copyright (C) 2024 netclosure contributors. All rights reserved.

import logging
from functools import lru_cache
from typing import Callable, List, NamedTuple, Optional, Sequence, Text, Tuple

import torch
from tqdm import tqdm

from .config import DEFAULT_LIMITS, Limits
from .digraph import Digraph, VertexSet, members
from .errors import FormatError, InvariantError, SizeLimitError

__all__ = [
    'ClosureOp',
    'AxiomViolation',
    'from_digraph',
    'from_function',
    'uniform',
    'verify_axioms',
    'verify_derived',
    'is_matroid',
    'matroid_violation',
    'matroid_rank',
    'leq',
    'deletion',
    'contraction',
    'cl_disjoint_union',
    'cl_unidirectional_union',
    'cl_bidirectional_union',
    'is_weak',
    'largest_weak_set',
    'is_connected',
    'is_separable',
    'simplify',
    'degree',
    'min_degree',
    'closure_girth',
    'blowup_cl',
    'is_below_uniform',
    'to_text',
    'from_text',
    'load_closure',
]

logger = logging.getLogger(__name__)

MAX_DERIVED_CHECK_VERTICES = 10


@lru_cache(maxsize=None)
def _subsets(n: int) -> torch.Tensor:
    return torch.arange(1 << n, dtype=torch.int64)


@lru_cache(maxsize=None)
def _popcounts(n: int) -> torch.Tensor:
    subsets = _subsets(n)
    counts = torch.zeros_like(subsets)
    for v in range(n):
        counts += (subsets >> v) & 1
    return counts


def _bits(positions: Sequence[int]) -> torch.Tensor:
    return torch.tensor([1 << p for p in positions], dtype=torch.int64)


def _expand(subsets: torch.Tensor, positions: Sequence[int]) -> torch.Tensor:
    """Maps bit i of each subset to bit positions[i]."""
    result = torch.zeros_like(subsets)
    for i, p in enumerate(positions):
        result |= ((subsets >> i) & 1) * (1 << p)
    return result


def _compress(masks: torch.Tensor, positions: Sequence[int]) -> torch.Tensor:
    """Inverse of :func:`_expand`; bits outside ``positions`` are dropped."""
    result = torch.zeros_like(masks)
    for i, p in enumerate(positions):
        result |= ((masks >> p) & 1) * (1 << i)
    return result


class ClosureOp:
    """Closure operator on [0, n) stored as a table of 2^n closures.

    ``table[X]`` is the closure of the subset whose bit mask is X.
    """

    def __init__(self, n: int, table: torch.Tensor, limits: Limits = DEFAULT_LIMITS) -> None:
        if n < 0:
            raise InvariantError("ground set size must be non-negative", f"n = {n}")
        if n > limits.max_closure_vertices:
            raise SizeLimitError("closure ground set", n, limits.max_closure_vertices)
        table = torch.as_tensor(table, dtype=torch.int64)
        if table.shape != (1 << n,):
            raise InvariantError("closure table must have 2^n entries", f"got shape {tuple(table.shape)}")
        if table.numel() and (int(table.min()) < 0 or int(table.max()) >= 1 << n):
            raise InvariantError("closure values must be subsets of the ground set")
        self.n = n
        self.table = table
        self.full: VertexSet = (1 << n) - 1
        self._rank: Optional[int] = None
        self._list: Optional[List[int]] = None

    def __call__(self, X: VertexSet) -> VertexSet:
        return int(self.table[X])

    def as_list(self) -> List[int]:
        if self._list is None:
            self._list = self.table.tolist()
        return self._list

    @property
    def rank(self) -> int:
        if self._rank is None:
            spanning = self.table == self.full
            self._rank = int(_popcounts(self.n)[spanning].min())
        return self._rank

    def bases(self) -> List[VertexSet]:
        spanning = (self.table == self.full) & (_popcounts(self.n) == self.rank)
        return _subsets(self.n)[spanning].tolist()

    def closed_sets(self) -> List[VertexSet]:
        return _subsets(self.n)[self.table == _subsets(self.n)].tolist()

    def is_closed(self, X: VertexSet) -> bool:
        return self(X) == X

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClosureOp):
            return NotImplemented
        return self.n == other.n and torch.equal(self.table, other.table)

    def __hash__(self) -> int:
        return hash((self.n, tuple(self.as_list())))

    def __repr__(self) -> str:
        return f"ClosureOp(n={self.n}, rank={self.rank})"


class AxiomViolation(NamedTuple):
    axiom: Text
    subset: VertexSet
    other: VertexSet


def from_digraph(D: Digraph, limits: Limits = DEFAULT_LIMITS) -> ClosureOp:
    """Tabulates the D-closure of every subset at once.

    Each round adds, for all subsets in parallel, the vertices whose
    in-neighbourhood is covered; n rounds reach the fixpoint.
    """
    n = D.n
    if n > limits.max_closure_vertices:
        raise SizeLimitError("closure ground set", n, limits.max_closure_vertices)
    in_masks = torch.tensor(D.in_masks, dtype=torch.int64)
    bits = _bits(range(n))
    X = _subsets(n).clone()
    for _ in range(n):
        covered = (in_masks.unsqueeze(0) & ~X.unsqueeze(1)) == 0
        Y = X | (covered.long() * bits).sum(dim=1)
        if torch.equal(X, Y):
            break
        X = Y
    logger.debug("Tabulated D-closure on %d vertices", n)
    return ClosureOp(n, X, limits)


def from_function(n: int, fn: Callable[[VertexSet], VertexSet], limits: Limits = DEFAULT_LIMITS) -> ClosureOp:
    return ClosureOp(n, torch.tensor([fn(X) for X in range(1 << n)], dtype=torch.int64), limits)


def uniform(r: int, n: int) -> ClosureOp:
    """U_{r,n}: sets of size at least r span everything, smaller sets are closed."""
    if not 0 <= r <= n:
        raise InvariantError("uniform operator needs 0 <= r <= n", f"r = {r}, n = {n}")
    subsets = _subsets(n)
    table = torch.where(_popcounts(n) >= r, torch.full_like(subsets, (1 << n) - 1), subsets)
    return ClosureOp(n, table)


def verify_axioms(cl: ClosureOp) -> List[AxiomViolation]:
    """Reports one witness per violated axiom; empty when cl is a closure."""
    report = []
    X = _subsets(cl.n)
    t = cl.table

    bad = ((t & X) != X).nonzero()
    if len(bad):
        x = int(bad[0])
        report.append(AxiomViolation('extensive', x, cl(x)))

    for v in range(cl.n):
        lower = X[((X >> v) & 1) == 0]
        upper = lower | (1 << v)
        bad = ((t[lower] & ~t[upper]) != 0).nonzero()
        if len(bad):
            i = int(bad[0])
            report.append(AxiomViolation('isotone', int(lower[i]), int(upper[i])))
            break

    bad = (t[t] != t).nonzero()
    if len(bad):
        x = int(bad[0])
        report.append(AxiomViolation('idempotent', x, cl(x)))
    return report


def verify_derived(cl: ClosureOp) -> List[AxiomViolation]:
    """Checks the four standard consequences of the closure axioms."""
    if cl.n > MAX_DERIVED_CHECK_VERTICES:
        raise SizeLimitError("derived-property check ground set", cl.n, MAX_DERIVED_CHECK_VERTICES)
    report = []
    X = _subsets(cl.n)
    t = cl.table
    closed = X[t == X]

    # cl(X) is the intersection of the closed sets containing X
    supersets = (closed.unsqueeze(0) & X.unsqueeze(1)) == X.unsqueeze(1)
    meet = torch.zeros_like(X)
    for v in range(cl.n):
        lacks = ((closed >> v) & 1) == 0
        meet |= (~(supersets & lacks.unsqueeze(0)).any(dim=1)).long() * (1 << v)
    bad = (meet != t).nonzero()
    if len(bad):
        x = int(bad[0])
        report.append(AxiomViolation('intersection of closed supersets', x, int(meet[x])))

    meets = closed.unsqueeze(0) & closed.unsqueeze(1)
    bad = (t[meets] != meets).nonzero()
    if len(bad):
        i, j = bad[0].tolist()
        report.append(AxiomViolation('closed sets closed under intersection', int(closed[i]), int(closed[j])))

    union = X.unsqueeze(0) | X.unsqueeze(1)
    bad = (t[union] != t[t.unsqueeze(0) | t.unsqueeze(1)]).nonzero()
    if len(bad):
        i, j = bad[0].tolist()
        report.append(AxiomViolation('closure of union', i, j))

    # rows are X, columns are Y
    inside = (X.unsqueeze(1) & ~t.unsqueeze(0)) == 0
    closure_inside = (t.unsqueeze(1) & ~t.unsqueeze(0)) == 0
    bad = (inside != closure_inside).nonzero()
    if len(bad):
        i, j = bad[0].tolist()
        report.append(AxiomViolation('inclusion in closure', i, j))
    return report


def matroid_violation(cl: ClosureOp) -> Optional[Tuple[VertexSet, int, int]]:
    """Returns (X, v, u) with u in cl(X + v) \\ cl(X) but v not in cl(X + u)."""
    X = _subsets(cl.n)
    t = cl.table
    for v in range(cl.n):
        for u in range(cl.n):
            if u == v:
                continue
            gained = ((t[X | (1 << v)] & ~t[X]) >> u) & 1
            exchanged = (t[X | (1 << u)] >> v) & 1
            bad = ((gained == 1) & (exchanged == 0)).nonzero()
            if len(bad):
                return int(bad[0]), v, u
    return None


def is_matroid(cl: ClosureOp) -> bool:
    return matroid_violation(cl) is None


def matroid_rank(cl: ClosureOp, X: VertexSet) -> int:
    """rk(X): the size of a smallest set with the same closure as X."""
    return int(_popcounts(cl.n)[cl.table == cl(X)].min())


def _check_ground(cl1: ClosureOp, cl2: ClosureOp) -> None:
    if cl1.n != cl2.n:
        raise InvariantError("operators must share the ground set", f"{cl1.n} != {cl2.n}")


def leq(cl1: ClosureOp, cl2: ClosureOp) -> bool:
    _check_ground(cl1, cl2)
    return bool(((cl1.table & ~cl2.table) == 0).all())


def _minor(cl: ClosureOp, V2: VertexSet, contract: bool) -> ClosureOp:
    if V2 & ~cl.full:
        raise InvariantError("removed set must lie in the ground set")
    positions = members(cl.full & ~V2)
    Y = _expand(_subsets(len(positions)), positions)
    if contract:
        Y = Y | V2
    return ClosureOp(len(positions), _compress(cl.table[Y], positions))


def deletion(cl: ClosureOp, V2: VertexSet) -> ClosureOp:
    """cl \\ V2 on V \\ V2, relabeled in increasing order."""
    return _minor(cl, V2, contract=False)


def contraction(cl: ClosureOp, V2: VertexSet) -> ClosureOp:
    """cl / V2 on V \\ V2, relabeled in increasing order."""
    return _minor(cl, V2, contract=True)


def _union_parts(cl1: ClosureOp, cl2: ClosureOp, limits: Limits):
    n = cl1.n + cl2.n
    if n > limits.max_closure_vertices:
        raise SizeLimitError("closure ground set", n, limits.max_closure_vertices)
    X = _subsets(n)
    X1 = X & cl1.full
    X2 = X >> cl1.n
    return n, X, X1, X2, cl1.table[X1], cl2.table[X2]


def cl_disjoint_union(cl1: ClosureOp, cl2: ClosureOp, limits: Limits = DEFAULT_LIMITS) -> ClosureOp:
    n, _, _, _, c1, c2 = _union_parts(cl1, cl2, limits)
    return ClosureOp(n, c1 | (c2 << cl1.n), limits)


def cl_unidirectional_union(cl1: ClosureOp, cl2: ClosureOp, limits: Limits = DEFAULT_LIMITS) -> ClosureOp:
    n, _, _, X2, c1, c2 = _union_parts(cl1, cl2, limits)
    spans = c1 == cl1.full
    table = torch.where(spans, cl1.full | (c2 << cl1.n), c1 | (X2 << cl1.n))
    return ClosureOp(n, table, limits)


def cl_bidirectional_union(cl1: ClosureOp, cl2: ClosureOp, limits: Limits = DEFAULT_LIMITS) -> ClosureOp:
    n, X, X1, X2, c1, c2 = _union_parts(cl1, cl2, limits)
    table = torch.where(
        X1 == cl1.full,
        cl1.full | (c2 << cl1.n),
        torch.where(X2 == cl2.full, c1 | (cl2.full << cl1.n), X))
    return ClosureOp(n, table, limits)


def is_weak(cl: ClosureOp, V2: VertexSet) -> bool:
    if V2 == 0 or V2 & ~cl.full or V2 == cl.full:
        raise InvariantError("weak sets are nonempty proper subsets", f"V2 = {V2:#x}")
    return deletion(cl, V2) == contraction(cl, V2)


def largest_weak_set(cl: ClosureOp) -> VertexSet:
    """Union of all weak sets, which is itself weak; 0 when there is none."""
    t = cl.as_list()
    loops = t[0]
    result = 0
    for V2 in tqdm(range(1, cl.full), desc="weak sets", disable=None, leave=False):
        # cl/V2 and cl\V2 agree on the empty set only if this holds
        if t[V2] & ~V2 != loops & ~V2:
            continue
        if V2 & ~result and is_weak(cl, V2):
            result |= V2
    logger.debug("Largest weak set %#x", result)
    return result


def is_connected(cl: ClosureOp) -> bool:
    return cl.n <= 1 or largest_weak_set(cl) == 0


def _loop_free(cl: ClosureOp) -> Tuple[ClosureOp, List[int]]:
    loops = cl(0)
    return deletion(cl, loops), members(cl.full & ~loops)


def is_separable(cl: ClosureOp) -> bool:
    """Checks cl(a) and cl(b) are disjoint whenever neither spans the other.

    The loops cl(0) are removed first.
    """
    reduced, _ = _loop_free(cl)
    singles = [reduced(1 << v) for v in range(reduced.n)]
    for a in range(reduced.n):
        for b in range(a + 1, reduced.n):
            if (singles[b] >> a) & 1 or (singles[a] >> b) & 1:
                continue
            if singles[a] & singles[b]:
                return False
    return True


def simplify(cl: ClosureOp) -> Tuple[ClosureOp, List[Optional[int]]]:
    """Removes the loops and collapses every parallel class to one vertex.

    Returns the reduced operator and, for each original vertex, the index of
    its representative in the reduced ground set (None for loops).
    """
    if not is_separable(cl):
        raise InvariantError("simplification needs a separable operator")
    reduced, positions = _loop_free(cl)
    singles = [reduced(1 << v) for v in range(reduced.n)]
    representatives = []
    for v in range(reduced.n):
        dominated = any(
            singles[v] & ~singles[u] == 0 and (singles[v] != singles[u] or u < v)
            for u in range(reduced.n) if u != v)
        if not dominated:
            representatives.append(v)
    kept = sum(1 << v for v in representatives)
    simple = deletion(reduced, reduced.full & ~kept)

    mapping: List[Optional[int]] = [None] * cl.n
    for i, v in enumerate(representatives):
        for w in members(singles[v]):
            assert mapping[positions[w]] is None
            mapping[positions[w]] = i
    logger.debug("Simplified %d vertices to %d", cl.n, simple.n)
    return simple, mapping


def degree(cl: ClosureOp, v: int) -> int:
    """min |X| with v in cl(X) \\ X, or 0 when v is a loop."""
    X = _subsets(cl.n)
    determined = (((cl.table & ~X) >> v) & 1) == 1
    if not bool(determined.any()):
        return 0
    return int(_popcounts(cl.n)[determined].min())


def min_degree(cl: ClosureOp) -> int:
    return min((degree(cl, v) for v in range(cl.n)), default=0)


def closure_girth(cl: ClosureOp) -> int:
    """min |X| with cl(V \\ X) != V; n + 1 when cl(0) already spans V."""
    X = _subsets(cl.n)
    complements = cl.full & ~X
    broken = cl.table[complements] != cl.full
    if not bool(broken.any()):
        return cl.n + 1
    return int(_popcounts(cl.n)[broken].min())


def blowup_cl(cl: ClosureOp, k: int, limits: Limits = DEFAULT_LIMITS) -> ClosureOp:
    """cl^[k] on V x [k]; element (v, i) has index v * k + i.

    A vertex v is present in X once its whole block [v] is; the blocks of
    the closure of the present vertices are added.
    """
    if k < 1:
        raise InvariantError("blow-up factor must be positive", f"k = {k}")
    N = cl.n * k
    if N > limits.max_closure_vertices:
        raise SizeLimitError("closure ground set", N, limits.max_closure_vertices)
    X = _subsets(N)
    block = (1 << k) - 1
    present = torch.zeros_like(X)
    for v in range(cl.n):
        present |= (((X >> (v * k)) & block) == block).long() * (1 << v)
    closed = cl.table[present]
    spread = torch.zeros_like(X)
    for v in range(cl.n):
        spread |= ((closed >> v) & 1) * (block << (v * k))
    return ClosureOp(N, X | spread, limits)


def is_below_uniform(cl: ClosureOp) -> bool:
    return leq(cl, uniform(cl.rank, cl.n))


def to_text(cl: ClosureOp) -> Text:
    lines = [f"closure {cl.n}"]
    lines.extend(f"{X:x} {c:x}" for X, c in enumerate(cl.as_list()))
    return '\n'.join(lines) + '\n'


def from_text(text: Text, limits: Limits = DEFAULT_LIMITS) -> ClosureOp:
    n = None
    table: List[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != 'closure':
                raise FormatError("expected header 'closure <n>'", lineno)
            try:
                n = int(parts[1])
            except ValueError:
                raise FormatError(f"invalid ground set size {parts[1]!r}", lineno)
            if n > limits.max_closure_vertices:
                raise SizeLimitError("closure ground set", n, limits.max_closure_vertices)
            continue
        if len(parts) != 2:
            raise FormatError(f"expected '<subset> <closure>', got {line!r}", lineno)
        try:
            subset, closure = int(parts[0], 16), int(parts[1], 16)
        except ValueError:
            raise FormatError(f"invalid hex in {line!r}", lineno)
        if subset != len(table):
            raise FormatError(f"subsets must be listed in increasing order, expected {len(table):x}", lineno)
        table.append(closure)
    if n is None:
        raise FormatError("missing header 'closure <n>'")
    if len(table) != 1 << n:
        raise FormatError(f"expected {1 << n} subsets, got {len(table)}")
    return ClosureOp(n, torch.tensor(table, dtype=torch.int64), limits)


def load_closure(path: Text, limits: Limits = DEFAULT_LIMITS) -> ClosureOp:
    with open(path) as f:
        return from_text(f.read(), limits)
