# Copyright (C) 2024 netclosure contributors. All rights reserved.

import random
import unittest

import pytest

from .helpers import all_digraphs, digraphs_up_to_isomorphism, fig2, fig3, strongly_connected_digraphs


def test_is_singleton_useless():
    from netclosure.reduce import is_singleton_useless
    assert is_singleton_useless(fig2(), 2)
    assert not is_singleton_useless(fig3(), 3)
    assert is_singleton_useless(fig3(), 4)


def test_singleton_without_out_neighbours():
    from netclosure.digraph import Digraph
    from netclosure.reduce import is_singleton_useless
    assert is_singleton_useless(Digraph(2, [(0, 1)]), 1)


def test_singleton_rejects_loops():
    from netclosure.digraph import Digraph
    from netclosure.errors import InvariantError
    from netclosure.reduce import is_singleton_useless
    with pytest.raises(InvariantError):
        is_singleton_useless(Digraph(2, [(0, 0), (0, 1), (1, 0)]), 0)


class TestRemoveUselessPart(unittest.TestCase):

    def test_fig2(self):
        from netclosure.digraph import Digraph
        from netclosure.reduce import remove_useless_part
        reduced, trace = remove_useless_part(fig2())
        self.assertEqual(trace.removed, [2])
        self.assertEqual(trace.remaining, [0, 1])
        self.assertEqual(reduced, Digraph(2, [(0, 1), (1, 0)]))

    def test_fig3(self):
        from netclosure.digraph import bidirectional_clique
        from netclosure.reduce import remove_useless_part
        reduced, trace = remove_useless_part(fig3())
        self.assertEqual(trace.removed, [4, 3])
        self.assertEqual(reduced, bidirectional_clique(3))
        first, second = trace.steps
        self.assertEqual(first.witnesses, [(2, [0, 1, 2, 3, 4])])
        self.assertEqual(second.witnesses, [])

    def test_clique(self):
        from netclosure.digraph import bidirectional_clique
        from netclosure.reduce import remove_useless_part
        reduced, trace = remove_useless_part(bidirectional_clique(3))
        self.assertEqual(trace.removed, [])
        self.assertEqual(reduced, bidirectional_clique(3))

    def test_trace_json(self):
        from netclosure.reduce import remove_useless_part
        _, trace = remove_useless_part(fig2())
        self.assertEqual(trace.to_json(), {
            'removed': [2],
            'steps': [{'vertex': 2, 'witnesses': [{'out_neighbour': 1, 'closure': [0, 1, 2]}]}],
            'remaining': [0, 1],
        })

    def test_rejects_bad_input(self):
        from netclosure.digraph import Digraph
        from netclosure.errors import InvariantError
        from netclosure.reduce import remove_useless_part
        with self.assertRaises(InvariantError):
            remove_useless_part(Digraph(3, [(0, 1), (1, 2)]))
        with self.assertRaises(InvariantError):
            remove_useless_part(Digraph(2, [(0, 0), (0, 1), (1, 0)]))


def test_brute_largest_useless():
    from netclosure.config import Limits
    from netclosure.digraph import directed_cycle
    from netclosure.errors import SizeLimitError
    from netclosure.reduce import brute_largest_useless
    assert brute_largest_useless(fig2()) == 0b100
    assert brute_largest_useless(fig3()) == 0b11000
    assert brute_largest_useless(directed_cycle(4)) == 0
    with pytest.raises(SizeLimitError):
        brute_largest_useless(directed_cycle(4), Limits(max_brute_vertices=3))


def _check_against_oracle(D):
    from netclosure.digraph import chordless_vertices
    from netclosure.reduce import brute_largest_useless, remove_useless_part
    useless = brute_largest_useless(D)
    assert useless & ~chordless_vertices(D) == 0
    reduced, trace = remove_useless_part(D)
    assert trace.removed_set == useless, (D, trace.removed)
    assert brute_largest_useless(reduced) == 0
    return reduced


def test_agrees_with_oracle_exhaustive():
    from netclosure.digraph import is_strongly_connected
    for n in range(2, 5):
        for D in all_digraphs(n):
            if is_strongly_connected(D):
                _check_against_oracle(D)


def test_agrees_with_oracle_up_to_isomorphism():
    from netclosure.digraph import is_strongly_connected
    assert [len(digraphs_up_to_isomorphism(n)) for n in range(1, 5)] == [1, 3, 16, 218]
    classes = digraphs_up_to_isomorphism(5)
    assert len(classes) == 9608
    for D in classes:
        if is_strongly_connected(D):
            _check_against_oracle(D)


def test_agrees_with_oracle_sampled():
    rng = random.Random(40)
    for n in (6, 7):
        for D in strongly_connected_digraphs(rng, n, 100, p=0.35):
            _check_against_oracle(D)


def test_each_removal_is_safe():
    from netclosure.digraph import remove_vertices, vertex_set
    from netclosure.reduce import brute_largest_useless, remove_useless_part
    rng = random.Random(41)
    for D in [fig2(), fig3()] + strongly_connected_digraphs(rng, 5, 10, p=0.3):
        useless = brute_largest_useless(D)
        _, trace = remove_useless_part(D)
        current, labels = D, list(range(D.n))
        for v in trace.removed:
            current, kept = remove_vertices(current, 1 << labels.index(v))
            labels = [labels[i] for i in kept]
            left = vertex_set(i for i, w in enumerate(labels) if (useless >> w) & 1)
            assert left & ~brute_largest_useless(current) == 0


def test_reduction_keeps_guessing_number():
    from netclosure.closure import from_digraph
    from netclosure.reduce import remove_useless_part
    from netclosure.solvegraph import guessing_number
    rng = random.Random(42)
    for D in [fig2(), fig3()] + strongly_connected_digraphs(rng, 5, 8, p=0.3):
        reduced, _ = remove_useless_part(D)
        before = guessing_number(from_digraph(D), 2)
        after = guessing_number(from_digraph(reduced), 2)
        assert before == after
