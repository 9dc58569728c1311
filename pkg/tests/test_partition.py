# Copyright (C) 2024 netclosure contributors. All rights reserved.

from fractions import Fraction
import random
import unittest

import pytest
import torch

from .helpers import all_digraphs, random_digraph


def _parity_words():
    return [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)]


def test_words():
    from netclosure.partition import format_word, index_word, word_digits, word_index
    assert word_index((1, 0, 1), 2) == 5
    assert index_word(5, 3, 2) == (1, 0, 1)
    assert format_word(6, 3, 2) == "011"
    assert format_word(11, 2, 11) == "0,1"
    digits = word_digits(torch.tensor([0, 5, 7]), 3, 2)
    assert digits.tolist() == [[0, 0, 0], [1, 0, 1], [1, 1, 1]]


def test_kernel():
    from netclosure.partition import equality, kernel, universal
    assert kernel([0, 1, 2, 3]) == equality(4)
    assert kernel([7, 7, 7, 7]) == universal(4)
    parity = kernel([0, 1, 1, 0])
    assert parity.num_parts == 2
    assert parity.sizes() == [2, 2]
    assert parity.parts() == [[0, 3], [1, 2]]
    assert kernel([5, 3, 5]) == kernel([0, 1, 0])


def test_join():
    from netclosure.partition import equality, join, kernel, refines, universal
    bit0 = kernel([0, 1, 0, 1])
    bit1 = kernel([0, 0, 1, 1])
    assert join(bit0, universal(4)) == bit0
    assert join(bit0, equality(4)) == equality(4)
    assert join(bit0, bit1) == equality(4)
    assert join(bit0, bit1) == join(bit1, bit0)
    assert join(bit0, bit0) == bit0
    assert refines(join(bit0, bit1), bit0)
    assert not refines(bit0, bit1)


def test_join_rejects_base_mismatch():
    from netclosure.errors import InvariantError
    from netclosure.partition import join, universal
    with pytest.raises(InvariantError):
        join(universal(4), universal(8))


def test_entropy():
    from netclosure.partition import entropy, equality, join, kernel, refines, universal
    assert entropy(equality(4), 2) == 2
    assert entropy(universal(4), 2) == 0
    assert entropy(kernel([0, 0, 1, 1]), 2) == 1
    uneven = entropy(kernel([0, 0, 0, 1]), 2)
    assert isinstance(uneven, float)
    assert 0 < uneven < 1
    rng = random.Random(20)
    for _ in range(20):
        f = kernel([rng.randrange(3) for _ in range(9)])
        g = kernel([rng.randrange(3) for _ in range(9)])
        h = join(f, g)
        assert refines(h, f)
        assert entropy(h, 3) >= entropy(f, 3) - 1e-12
        assert entropy(h, 3) <= entropy(f, 3) + entropy(g, 3) + 1e-12


def test_entropy_needs_power_of_q():
    from netclosure.errors import InvariantError
    from netclosure.partition import entropy, universal
    with pytest.raises(InvariantError):
        entropy(universal(6), 2)


class TestCodingFunction(unittest.TestCase):

    def test_parity(self):
        from netclosure.closure import uniform
        from netclosure.partition import coding_function_from_words, image, induced_closure, is_coding_function
        U23 = uniform(2, 3)
        f = coding_function_from_words(_parity_words(), U23, 2)
        self.assertTrue(is_coding_function(f, U23))
        self.assertEqual(image(f), [0, 3, 5, 6])
        self.assertEqual(f.entropy(0b111), 2)
        self.assertEqual(induced_closure(f), U23)

    def test_repetition(self):
        from netclosure.closure import uniform
        from netclosure.partition import coding_function_from_words, image, induced_closure, is_coding_function
        U13 = uniform(1, 3)
        f = coding_function_from_words([(0, 0, 0), (1, 1, 1)], U13, 2)
        self.assertTrue(is_coding_function(f, U13))
        self.assertEqual(image(f), [0, 7])
        self.assertEqual(f.part(0), f.part(2))
        self.assertEqual(induced_closure(f), U13)

    def test_single_word(self):
        from netclosure.closure import uniform
        from netclosure.partition import coding_function_from_words, image, induced_closure, universal
        f = coding_function_from_words([(1, 0)], uniform(1, 2), 2)
        self.assertEqual(image(f), [1])
        self.assertEqual(f.part(0), universal(2))
        self.assertEqual(induced_closure(f), uniform(0, 2))

    def test_invalid_assignment(self):
        from netclosure.closure import uniform
        from netclosure.partition import CodingFunction, is_coding_function
        # each vertex reads a different coordinate of the base element
        symbols = torch.tensor([[0, 1, 0, 1], [0, 0, 1, 1], [0, 1, 1, 0]])
        f = CodingFunction(2, 2, symbols)
        self.assertFalse(is_coding_function(f, uniform(1, 3)))
        self.assertTrue(is_coding_function(f, uniform(2, 3)))

    def test_adjacent_words_rejected(self):
        from netclosure.closure import uniform
        from netclosure.errors import NotIndependentError
        from netclosure.partition import coding_function_from_words
        with self.assertRaises(NotIndependentError) as cm:
            coding_function_from_words([(0, 0, 0), (0, 0, 1)], uniform(2, 3), 2)
        self.assertEqual(cm.exception.pair, (0, 4))
        self.assertEqual(cm.exception.agreement, 0b011)

    def test_too_many_words(self):
        from netclosure.closure import uniform
        from netclosure.errors import InvariantError
        from netclosure.partition import coding_function_from_words
        with self.assertRaises(InvariantError):
            coding_function_from_words([(0, 0), (1, 1), (0, 1)], uniform(1, 2), 2)

    def test_symbols_out_of_range(self):
        from netclosure.errors import InvariantError
        from netclosure.partition import CodingFunction
        with self.assertRaises(InvariantError):
            CodingFunction(2, 1, torch.tensor([[0, 2]]))


def test_refinement_of_unions():
    from netclosure.closure import uniform
    from netclosure.partition import coding_function_from_words, join
    f = coding_function_from_words(_parity_words(), uniform(2, 3), 2)
    for S in range(8):
        for T in range(8):
            assert f.partition(S | T) == join(f.partition(S), f.partition(T))


@pytest.mark.parametrize("r, q", [(1, 2), (2, 2), (1, 3), (2, 3)])
def test_matroid_solutions_have_rank_entropy(r, q):
    from netclosure.closure import matroid_rank, uniform
    from netclosure.solvegraph import is_solvable
    cl = uniform(r, 3)
    solvable, f = is_solvable(cl, q)
    assert solvable
    for X in range(8):
        assert f.entropy(X) == matroid_rank(cl, X)


def test_text_round_trip():
    from netclosure.closure import uniform
    from netclosure.partition import coding_function_from_words, from_text, to_text
    f = coding_function_from_words(_parity_words(), uniform(2, 3), 2)
    text = to_text(f)
    assert text.splitlines()[0] == "coding 3 2 2"
    assert from_text(text) == f


def test_text_errors():
    from netclosure.errors import FormatError
    from netclosure.partition import from_text
    with pytest.raises(FormatError):
        from_text("coding 1 2\n0 1\n")
    with pytest.raises(FormatError):
        from_text("coding 1 2 1\n0 1 0\n")


def test_entropy_is_exact_for_power_parts():
    from netclosure.partition import entropy, kernel
    assert isinstance(entropy(kernel([0, 0, 1, 1, 2, 2, 3, 3]), 2), Fraction)


def test_coding_functions_are_those_below_their_closure():
    from netclosure.closure import from_digraph, leq
    from netclosure.partition import CodingFunction, induced_closure, is_coding_function
    rng = random.Random(21)
    generator = torch.Generator().manual_seed(21)
    agreed = 0
    for _ in range(150):
        n = rng.randint(1, 4)
        r = rng.choice([1, 2])
        q = 2
        f = CodingFunction(q, r, torch.randint(0, q, (n, q ** r), generator=generator))
        cl = from_digraph(random_digraph(rng, n, p=rng.choice([0.2, 0.5]), loops=rng.random() < 0.3))
        expected = leq(cl, induced_closure(f))
        assert is_coding_function(f, cl) == expected
        agreed += expected
    assert agreed > 0


def test_solvability_passes_down_the_order():
    from netclosure.closure import from_digraph, leq, uniform
    from netclosure.partition import is_coding_function
    from netclosure.solvegraph import is_solvable
    closures = {from_digraph(D) for D in all_digraphs(3, loops=True)}
    closures.update(uniform(r, 3) for r in range(4))
    solutions = {cl: is_solvable(cl, 2) for cl in closures}
    strict = 0
    for cl2, (solvable, f) in solutions.items():
        if not solvable:
            continue
        for cl1 in closures:
            if cl1.rank == cl2.rank and leq(cl1, cl2):
                assert solutions[cl1][0]
                assert is_coding_function(f, cl1)
                strict += cl1 != cl2
    assert strict > 0
