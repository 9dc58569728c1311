# Copyright (C) 2024 netclosure contributors. All rights reserved.

import logging
import math
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Text, Tuple, Union

import torch

from .closure import ClosureOp, from_function
from .digraph import VertexSet, members
from .errors import FormatError, InvariantError, NotIndependentError

__all__ = [
    'Partition',
    'CodingFunction',
    'word_index',
    'index_word',
    'format_word',
    'word_digits',
    'agreement_masks',
    'kernel',
    'join',
    'refines',
    'equality',
    'universal',
    'entropy',
    'is_coding_function',
    'induced_closure',
    'image',
    'coding_function_from_words',
    'two_word_coding_function',
    'to_text',
    'from_text',
]

logger = logging.getLogger(__name__)

Word = Union[int, Sequence[int]]


def word_index(word: Sequence[int], q: int) -> int:
    """Coordinate v is the digit of weight q^v."""
    index = 0
    for v in reversed(range(len(word))):
        index = index * q + int(word[v])
    return index


def index_word(index: int, n: int, q: int) -> Tuple[int, ...]:
    word = []
    for _ in range(n):
        index, digit = divmod(index, q)
        word.append(digit)
    return tuple(word)


def format_word(index: int, n: int, q: int) -> Text:
    sep = '' if q <= 10 else ','
    return sep.join(str(x) for x in index_word(index, n, q))


def word_digits(words: torch.Tensor, n: int, q: int) -> torch.Tensor:
    """Digits of each word index; shape (len(words), n)."""
    weights = torch.tensor([q ** v for v in range(n)], dtype=torch.int64)
    return torch.div(words.unsqueeze(1), weights, rounding_mode='floor') % q


def agreement_masks(digits_x: torch.Tensor, digits_y: torch.Tensor) -> torch.Tensor:
    """Bit mask of the coordinates where each x and each y agree."""
    n = digits_x.shape[1]
    bits = torch.tensor([1 << v for v in range(n)], dtype=torch.int64)
    equal = digits_x.unsqueeze(1) == digits_y.unsqueeze(0)
    return (equal.long() * bits).sum(dim=2)


def _canonical(labels: torch.Tensor) -> torch.Tensor:
    """Relabels parts 0, 1, ... in order of first occurrence."""
    if labels.numel() == 0:
        return labels
    _, inverse = torch.unique(labels, return_inverse=True)
    ordered, perm = torch.sort(inverse, stable=True)
    starts = torch.ones_like(ordered, dtype=torch.bool)
    starts[1:] = ordered[1:] != ordered[:-1]
    first = perm[starts]
    rank = torch.argsort(torch.argsort(first))
    return rank[inverse]


class Partition:
    """Partition of a base set [0, m) given by one part label per element."""

    def __init__(self, labels: Union[torch.Tensor, Sequence[int]]) -> None:
        labels = torch.as_tensor(labels, dtype=torch.int64).flatten()
        self.labels = _canonical(labels)
        self.base_size = int(self.labels.numel())
        self.num_parts = int(self.labels.max()) + 1 if self.base_size else 0

    def sizes(self) -> List[int]:
        return torch.bincount(self.labels, minlength=self.num_parts).tolist()

    def parts(self) -> List[List[int]]:
        result: List[List[int]] = [[] for _ in range(self.num_parts)]
        for b, label in enumerate(self.labels.tolist()):
            result[label].append(b)
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return torch.equal(self.labels, other.labels)

    def __hash__(self) -> int:
        return hash(tuple(self.labels.tolist()))

    def __repr__(self) -> str:
        return f"Partition({self.parts()})"


def kernel(fn: Union[torch.Tensor, Sequence[int]]) -> Partition:
    """Partition of the domain into the preimages of ``fn``."""
    return Partition(fn)


def equality(m: int) -> Partition:
    return Partition(torch.arange(m))


def universal(m: int) -> Partition:
    return Partition(torch.zeros(m, dtype=torch.int64))


def _check_base(f: Partition, g: Partition) -> None:
    if f.base_size != g.base_size:
        raise InvariantError("partitions must share the base set", f"{f.base_size} != {g.base_size}")


def join(f: Partition, g: Partition) -> Partition:
    """Common refinement: parts are the nonempty intersections."""
    _check_base(f, g)
    return Partition(f.labels * max(g.num_parts, 1) + g.labels)


def refines(f: Partition, g: Partition) -> bool:
    """True when every part of ``f`` lies inside a part of ``g``."""
    _check_base(f, g)
    return join(f, g).num_parts == f.num_parts


def _exponent(value: int, q: int) -> int:
    """Returns k with q^k == value, or -1."""
    k = 0
    while value > 1 and value % q == 0:
        value //= q
        k += 1
    return k if value == 1 else -1


def entropy(f: Partition, q: int) -> Union[Fraction, float]:
    """H(f) = r - q^-r sum |P| log_q |P| for a partition of A^r.

    Exact when every part size is a power of q.
    """
    r = _exponent(f.base_size, q)
    if r < 0:
        raise InvariantError("base set size must be a power of q", f"{f.base_size} with q = {q}")
    sizes = f.sizes()
    exponents = [_exponent(s, q) for s in sizes]
    if all(k >= 0 for k in exponents):
        return r - Fraction(sum(s * k for s, k in zip(sizes, exponents)), f.base_size)
    total = sum(s * math.log(s, q) for s in sizes)
    return r - total / f.base_size


class CodingFunction:
    """n partitions of A^r, one per vertex, each with at most q parts.

    ``symbols[v, b]`` is the symbol vertex v assigns to base element b; the
    partition f_v is its kernel.
    """

    def __init__(self, q: int, r: int, symbols: torch.Tensor) -> None:
        if q < 2:
            raise InvariantError("alphabet size must be at least 2", f"q = {q}")
        symbols = torch.as_tensor(symbols, dtype=torch.int64)
        if symbols.dim() != 2 or symbols.shape[1] != q ** r:
            raise InvariantError("coding function needs q^r symbols per vertex", f"shape {tuple(symbols.shape)}")
        if symbols.numel() and (int(symbols.min()) < 0 or int(symbols.max()) >= q):
            raise InvariantError("symbols must lie in the alphabet", f"q = {q}")
        self.q = q
        self.r = r
        self.symbols = symbols
        self.n = int(symbols.shape[0])
        self.base_size = q ** r
        self._parts: Dict[VertexSet, int] = {}

    def part(self, v: int) -> Partition:
        return kernel(self.symbols[v])

    def partition(self, X: VertexSet) -> Partition:
        labels = torch.zeros(self.base_size, dtype=torch.int64)
        for v in members(X):
            labels = labels * self.q + self.symbols[v]
            labels = _canonical(labels)
        return Partition(labels)

    def num_parts(self, X: VertexSet) -> int:
        """Number of parts of f_X."""
        if X not in self._parts:
            if X == 0:
                self._parts[X] = 1
            else:
                columns = self.symbols[members(X)]
                self._parts[X] = int(torch.unique(columns, dim=1).shape[1])
        return self._parts[X]

    def entropy(self, X: VertexSet) -> Union[Fraction, float]:
        return entropy(self.partition(X), self.q)

    def words(self) -> torch.Tensor:
        """Word index of every base element."""
        weights = torch.tensor([self.q ** v for v in range(self.n)], dtype=torch.int64)
        return (self.symbols * weights.unsqueeze(1)).sum(dim=0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CodingFunction):
            return NotImplemented
        return self.q == other.q and self.r == other.r and torch.equal(self.symbols, other.symbols)

    def __repr__(self) -> str:
        return f"CodingFunction(n={self.n}, q={self.q}, r={self.r})"


def is_coding_function(f: CodingFunction, cl: ClosureOp) -> bool:
    """Checks f_X = f_cl(X) for every X.

    f_cl(X) refines f_X, so equal part counts mean equal partitions.
    """
    if f.n != cl.n:
        raise InvariantError("coding function and closure must share the ground set", f"{f.n} != {cl.n}")
    for X, closed in enumerate(cl.as_list()):
        if closed != X and f.num_parts(X) != f.num_parts(closed):
            logger.debug("f_X != f_cl(X) at X = %#x", X)
            return False
    return True


def induced_closure(f: CodingFunction) -> ClosureOp:
    """cl_f(X) = {v : f_{X + v} = f_X}."""
    counts = [f.num_parts(X) for X in range(1 << f.n)]

    def closure(X: VertexSet) -> VertexSet:
        result = X
        for v in range(f.n):
            if counts[X | (1 << v)] == counts[X]:
                result |= 1 << v
        return result

    return from_function(f.n, closure)


def image(f: CodingFunction) -> List[int]:
    """Sorted word indices of Im(f)."""
    return torch.unique(f.words()).tolist()


def _normalize_words(words: Iterable[Word], q: int) -> List[int]:
    result = set()
    for w in words:
        result.add(int(w) if isinstance(w, int) else word_index(w, q))
    return sorted(result)


def coding_function_from_words(words: Iterable[Word], cl: ClosureOp, q: int) -> CodingFunction:
    """Coding function whose image is exactly ``words``.

    Base element b is sent to word min(b, k - 1) of the sorted word list,
    and each vertex reads its coordinate of that word.
    """
    indices = _normalize_words(words, q)
    k = len(indices)
    r = cl.rank
    m = q ** r
    if not 1 <= k <= m:
        raise InvariantError("a coding function image holds between 1 and q^r words", f"{k} words, q^r = {m}")
    digits = word_digits(torch.tensor(indices, dtype=torch.int64), cl.n, q)
    agreement = agreement_masks(digits, digits)
    closed = cl.table[agreement] == agreement
    closed.fill_diagonal_(True)
    bad = (~closed).nonzero()
    if len(bad):
        i, j = bad[0].tolist()
        raise NotIndependentError((indices[i], indices[j]), int(agreement[i, j]))
    choice = torch.clamp(torch.arange(m), max=k - 1)
    return CodingFunction(q, r, digits[choice].T.contiguous())


def two_word_coding_function(x: Word, y: Word, cl: ClosureOp, q: int) -> CodingFunction:
    return coding_function_from_words([x, y], cl, q)


def to_text(f: CodingFunction) -> Text:
    lines = [f"coding {f.n} {f.q} {f.r}"]
    for row in f.symbols.tolist():
        lines.append(' '.join(str(s) for s in row))
    return '\n'.join(lines) + '\n'


def from_text(text: Text) -> CodingFunction:
    header = None
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 4 or parts[0] != 'coding':
                raise FormatError("expected header 'coding <n> <q> <r>'", lineno)
            try:
                header = tuple(int(p) for p in parts[1:])
            except ValueError:
                raise FormatError(f"invalid header {line!r}", lineno)
            continue
        try:
            rows.append([int(p) for p in parts])
        except ValueError:
            raise FormatError(f"invalid symbols {line!r}", lineno)
    if header is None:
        raise FormatError("missing header 'coding <n> <q> <r>'")
    n, q, r = header
    if len(rows) != n or any(len(row) != q ** r for row in rows):
        raise FormatError(f"expected {n} lines of {q ** r} symbols")
    return CodingFunction(q, r, torch.tensor(rows, dtype=torch.int64).reshape(n, q ** r))
