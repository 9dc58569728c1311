# Copyright (C) 2024 netclosure contributors. All rights reserved.

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple, Union

import torch

from ._search import dsatur_coloring, exact_coloring, max_independent_set, to_bitsets
from .closure import (
    ClosureOp,
    cl_bidirectional_union,
    cl_disjoint_union,
    cl_unidirectional_union,
    closure_girth,
    min_degree,
    uniform,
)
from .config import DEFAULT_LIMITS, Limits
from .digraph import members
from .errors import InvariantError, SizeLimitError
from .partition import (
    CodingFunction,
    agreement_masks,
    coding_function_from_words,
    format_word,
    to_text as coding_to_text,
    word_digits,
)

__all__ = [
    'LogValue',
    'SolvGraph',
    'Certificate',
    'build',
    'literal_edges',
    'alpha',
    'guessing_number',
    'certify',
    'is_solvable',
    'chi',
    'chi_bounds',
    'index_number',
    'coset_coloring',
    'max_code',
    'code_bounds',
    'translate',
    'conormal',
    'lexicographic',
    'cartesian',
    'product_check',
]

logger = logging.getLogger(__name__)

Graph = Union['SolvGraph', torch.Tensor]

ROW_CHUNK = 1024


@dataclass(frozen=True)
class LogValue:
    """The exact number log_base(argument)."""
    argument: int
    base: int

    def __float__(self) -> float:
        return math.log(self.argument) / math.log(self.base)

    def exponent(self) -> Optional[int]:
        """The integer value when ``argument`` is a power of ``base``."""
        value, k = self.argument, 0
        while value > 1 and value % self.base == 0:
            value //= self.base
            k += 1
        return k if value == 1 else None

    def __str__(self) -> str:
        return f"log_{self.base}({self.argument})"


class SolvGraph:
    """Solvability graph G(cl, A) on the q^n words over A = [0, q).

    Two distinct words are adjacent iff the set of coordinates where they
    agree is not closed. Words are integers with coordinate v at weight q^v.
    """

    def __init__(self, cl: ClosureOp, q: int, limits: Limits = DEFAULT_LIMITS) -> None:
        if q < 2:
            raise InvariantError("alphabet size must be at least 2", f"q = {q}")
        size = q ** cl.n
        if size > limits.max_predicate_words:
            raise SizeLimitError("solvability graph words", size, limits.max_predicate_words)
        self.cl = cl
        self.q = q
        self.n = cl.n
        self.size = size
        self.limits = limits
        self.closed = cl.table == torch.arange(1 << cl.n, dtype=torch.int64)
        self._adjacency: Optional[torch.Tensor] = None
        self._rows: Optional[List[int]] = None

    @property
    def materialized(self) -> bool:
        return self.size <= self.limits.max_materialized_words

    def digits(self, words: torch.Tensor) -> torch.Tensor:
        return word_digits(words, self.n, self.q)

    def agreement(self, x: int, y: int) -> int:
        dx = self.digits(torch.tensor([x]))
        dy = self.digits(torch.tensor([y]))
        return int(agreement_masks(dx, dy)[0, 0])

    def adjacent(self, x: int, y: int) -> bool:
        return x != y and not bool(self.closed[self.agreement(x, y)])

    def _block(self, xs: torch.Tensor, ys: torch.Tensor) -> torch.Tensor:
        agree = agreement_masks(self.digits(xs), self.digits(ys))
        return ~self.closed[agree] & (xs.unsqueeze(1) != ys.unsqueeze(0))

    def neighbours(self, x: int) -> torch.Tensor:
        """Sorted neighbour indices; works without materializing."""
        found = []
        xs = torch.tensor([x])
        for start in range(0, self.size, ROW_CHUNK * 16):
            ys = torch.arange(start, min(start + ROW_CHUNK * 16, self.size))
            found.append(ys[self._block(xs, ys)[0]])
        return torch.cat(found)

    def degree(self, x: int = 0) -> int:
        return int(self.neighbours(x).numel())

    @property
    def adjacency(self) -> torch.Tensor:
        if self._adjacency is None:
            if not self.materialized:
                raise SizeLimitError("materialized solvability graph words", self.size,
                                     self.limits.max_materialized_words)
            words = torch.arange(self.size)
            blocks = [self._block(words[i:i + ROW_CHUNK], words) for i in range(0, self.size, ROW_CHUNK)]
            self._adjacency = torch.cat(blocks)
            logger.debug("Materialized solvability graph with %d words", self.size)
        return self._adjacency

    @property
    def rows(self) -> List[int]:
        if self._rows is None:
            self._rows = to_bitsets(self.adjacency)
        return self._rows

    def basis_cells(self) -> List[int]:
        """Cliques grouping the words by their values on a basis.

        Words agreeing on a basis b agree on a set whose closure is V, so
        each group is a clique; there are q^r of them.
        """
        basis = members(self.cl.bases()[0])
        digits = self.digits(torch.arange(self.size))
        key = torch.zeros(self.size, dtype=torch.int64)
        for v in reversed(basis):
            key = key * self.q + digits[:, v]
        cells = [0] * (self.q ** len(basis))
        for word, k in enumerate(key.tolist()):
            cells[k] |= 1 << word
        return cells

    def __repr__(self) -> str:
        return f"SolvGraph(n={self.n}, q={self.q}, words={self.size})"


def build(cl: ClosureOp, q: int, limits: Limits = DEFAULT_LIMITS) -> SolvGraph:
    return SolvGraph(cl, q, limits)


def literal_edges(cl: ClosureOp, q: int) -> torch.Tensor:
    """Adjacency from the union over (S, v) with v in cl(S) \\ S of the
    pairs agreeing on S and differing at v."""
    size = q ** cl.n
    digits = word_digits(torch.arange(size), cl.n, q)
    agree = agreement_masks(digits, digits).tolist()
    table = cl.as_list()
    adjacency = torch.zeros(size, size, dtype=torch.bool)
    for x in range(size):
        for y in range(x + 1, size):
            A = agree[x][y]
            for S in range(1 << cl.n):
                if S & ~A == 0 and table[S] & ~S & ~A:
                    adjacency[x, y] = adjacency[y, x] = True
                    break
    return adjacency


def _as_adjacency(G: Graph) -> torch.Tensor:
    return G.adjacency if isinstance(G, SolvGraph) else G


def _alpha_search(G: Graph, limits: Limits) -> List[int]:
    adjacency = _as_adjacency(G)
    size = adjacency.shape[0]
    if size > limits.max_alpha_words:
        raise SizeLimitError("independence search words", size, limits.max_alpha_words)
    if isinstance(G, SolvGraph):
        cells = G.basis_cells()
        # translations act transitively, so some maximum set contains word 0
        return max_independent_set(G.rows, cells, initial=(0,), upper_bound=G.q ** G.cl.rank)
    return max_independent_set(to_bitsets(adjacency))


def alpha(G: Graph, limits: Limits = DEFAULT_LIMITS) -> Tuple[int, List[int]]:
    """Independence number and one maximum independent set."""
    witness = _alpha_search(G, limits)
    return len(witness), witness


def guessing_number(cl: ClosureOp, q: int, limits: Limits = DEFAULT_LIMITS) -> LogValue:
    size, _ = alpha(build(cl, q, limits), limits)
    return LogValue(size, q)


@dataclass
class Certificate:
    alpha: int
    rank: int
    q: int
    solvable: bool
    witness_words: List[int]
    coding_function: Optional[CodingFunction]
    n: int

    def to_json(self) -> Dict[str, Any]:
        return {
            'alpha': self.alpha,
            'rank': self.rank,
            'q': self.q,
            'solvable': self.solvable,
            'guessing_number': str(LogValue(self.alpha, self.q)),
            'witness_words': [format_word(w, self.n, self.q) for w in self.witness_words],
            'coding_function': coding_to_text(self.coding_function) if self.coding_function is not None else None,
        }


def certify(cl: ClosureOp, q: int, limits: Limits = DEFAULT_LIMITS) -> Certificate:
    """Decides solvability and returns the evidence.

    Solvable iff alpha = q^r; the witness set is then turned into a coding
    function whose image it is.
    """
    size, witness = alpha(build(cl, q, limits), limits)
    solvable = size == q ** cl.rank
    f = coding_function_from_words(witness, cl, q) if solvable else None
    logger.info("alpha = %d, q^r = %d, solvable = %s", size, q ** cl.rank, solvable)
    return Certificate(size, cl.rank, q, solvable, witness, f, cl.n)


def is_solvable(cl: ClosureOp, q: int, limits: Limits = DEFAULT_LIMITS) -> Tuple[bool, Optional[CodingFunction]]:
    certificate = certify(cl, q, limits)
    return certificate.solvable, certificate.coding_function


def coset_coloring(words: List[int], cl: ClosureOp, q: int) -> List[int]:
    """Colours A^n by translating a solution on the non-basis coordinates.

    ``words`` must be an independent set of size q^r. Word z gets the colour
    of z - x restricted to V \\ b, where x is the word agreeing with z on the
    basis b.
    """
    r = cl.rank
    if len(words) != q ** r:
        raise InvariantError("coset colouring needs an independent set of size q^r",
                             f"{len(words)} words, q^r = {q ** r}")
    bases = cl.bases()
    if not bases:
        raise InvariantError("operator has no basis")
    basis = members(bases[0])
    rest = members(cl.full & ~bases[0])

    def basis_key(digits: torch.Tensor) -> torch.Tensor:
        key = torch.zeros(digits.shape[0], dtype=torch.int64)
        for v in reversed(basis):
            key = key * q + digits[:, v]
        return key

    code = word_digits(torch.tensor(sorted(words), dtype=torch.int64), cl.n, q)
    code_keys = basis_key(code)
    if torch.unique(code_keys).numel() != len(words):
        raise InvariantError("independent words must differ on the basis")
    lookup = torch.empty(q ** r, dtype=torch.int64)
    lookup[code_keys] = torch.arange(len(words))
    digits = word_digits(torch.arange(q ** cl.n), cl.n, q)
    shift = (digits - code[lookup[basis_key(digits)]]) % q
    color = torch.zeros(q ** cl.n, dtype=torch.int64)
    for v in reversed(rest):
        color = color * q + shift[:, v]
    return color.tolist()


def _is_proper(rows: List[int], coloring: List[int]) -> bool:
    return all(coloring[u] != coloring[v] for v in range(len(rows)) for u in members(rows[v]))


def chi_bounds(G: Graph, limits: Limits = DEFAULT_LIMITS) -> Tuple[int, int, Optional[List[int]]]:
    """Lower and upper bounds on the chromatic number, with a colouring
    reaching the upper bound when one was built."""
    size = _as_adjacency(G).shape[0]
    independence, witness = alpha(G, limits)
    lower = -(-size // independence)
    coloring = None
    if isinstance(G, SolvGraph) and independence == G.q ** G.cl.rank:
        coloring = coset_coloring(witness, G.cl, G.q)
    elif size <= limits.max_chi_words:
        coloring = dsatur_coloring(_rows(G))
    if coloring is not None:
        return lower, max(coloring) + 1, coloring
    # vertex-transitive graphs have chi <= (1 + ln alpha) |V| / alpha
    upper = math.ceil((1 + math.log(independence)) * size / independence)
    logger.warning("Colouring skipped for %d words; reporting bounds only", size)
    return lower, upper, None


def _rows(G: Graph) -> List[int]:
    return G.rows if isinstance(G, SolvGraph) else to_bitsets(G)


def chi(G: Graph, limits: Limits = DEFAULT_LIMITS) -> int:
    size = _as_adjacency(G).shape[0]
    if size > limits.max_chi_words:
        raise SizeLimitError("exact colouring words", size, limits.max_chi_words)
    lower, upper, coloring = chi_bounds(G, limits)
    assert coloring is not None
    if lower == upper:
        return upper
    rows = _rows(G)
    assert _is_proper(rows, coloring)
    value, _ = exact_coloring(rows, lower, coloring)
    return value


def index_number(cl: ClosureOp, q: int, limits: Limits = DEFAULT_LIMITS) -> LogValue:
    return LogValue(chi(build(cl, q, limits), limits), q)


def max_code(n: int, d: int, q: int, limits: Limits = DEFAULT_LIMITS) -> int:
    """M_q(n, d): largest code of length n with minimum distance d."""
    r = min(n, max(0, n - d + 1))
    size, _ = alpha(build(uniform(r, n), q, limits), limits)
    return size


def code_bounds(cl: ClosureOp, q: int, limits: Limits = DEFAULT_LIMITS) -> Tuple[LogValue, LogValue]:
    """log_q M(n, n - delta + 1) <= g(cl, q) <= log_q M(n, gamma)."""
    lower = max_code(cl.n, cl.n - min_degree(cl) + 1, q, limits)
    upper = max_code(cl.n, closure_girth(cl), q, limits)
    return LogValue(lower, q), LogValue(upper, q)


def translate(G: SolvGraph, x: int, y: int) -> torch.Tensor:
    """The permutation z -> z - x + y, coordinatewise mod q."""
    words = torch.arange(G.size)
    digits = G.digits(words)
    shift = (G.digits(torch.tensor([y])) - G.digits(torch.tensor([x]))) % G.q
    moved = (digits + shift) % G.q
    weights = torch.tensor([G.q ** v for v in range(G.n)], dtype=torch.int64)
    return (moved * weights).sum(dim=1)


def _factors(G1: Graph, G2: Graph):
    A1 = _as_adjacency(G1).to(torch.uint8)
    A2 = _as_adjacency(G2).to(torch.uint8)
    I1 = torch.eye(A1.shape[0], dtype=torch.uint8)
    I2 = torch.eye(A2.shape[0], dtype=torch.uint8)
    return A1, A2, I1, I2


# Product vertex (u1, u2) has index u1 + u2 * |V(G1)|, matching the word
# obtained by concatenating a word of G1 with a word of G2.

def conormal(G1: Graph, G2: Graph) -> torch.Tensor:
    A1, A2, I1, I2 = _factors(G1, G2)
    return (torch.kron(A2, torch.ones_like(A1)) | torch.kron(torch.ones_like(A2), A1)).bool()


def lexicographic(G1: Graph, G2: Graph) -> torch.Tensor:
    A1, A2, I1, I2 = _factors(G1, G2)
    return (torch.kron(torch.ones_like(A2), A1) | torch.kron(A2, I1)).bool()


def cartesian(G1: Graph, G2: Graph) -> torch.Tensor:
    A1, A2, I1, I2 = _factors(G1, G2)
    return (torch.kron(I2, A1) | torch.kron(A2, I1)).bool()


def product_check(cl1: ClosureOp, cl2: ClosureOp, q: int, limits: Limits = DEFAULT_LIMITS) -> Dict[str, bool]:
    """Compares the graphs of the three unions with the three products."""
    G1, G2 = build(cl1, q, limits), build(cl2, q, limits)
    pairs = {
        'disjoint': (cl_disjoint_union, conormal),
        'unidirectional': (cl_unidirectional_union, lexicographic),
        'bidirectional': (cl_bidirectional_union, cartesian),
    }
    report = {}
    for name, (union, product) in pairs.items():
        G = build(union(cl1, cl2, limits), q, limits)
        report[name] = torch.equal(G.adjacency, product(G1, G2))
    return report
