# Copyright (C) 2024 netclosure contributors. All rights reserved.

import json
import os
import random
import unittest

import pytest
import torch

from .helpers import all_digraphs, random_digraph

INSTANCES = os.path.join(os.path.dirname(__file__), '..', 'instances')

BUTTERFLY_ARCS = [(0, 3), (1, 2), (0, 4), (1, 4), (4, 2), (4, 3)]


def butterfly():
    from netclosure.netcode import NetworkInstance
    return NetworkInstance(2, 1, BUTTERFLY_ARCS)


def direct_links(r):
    from netclosure.netcode import NetworkInstance
    return NetworkInstance(r, 0, [(i, r + i) for i in range(r)])


class TestNetworkInstance(unittest.TestCase):

    def test_load(self):
        from netclosure.netcode import load_network
        N = load_network(os.path.join(INSTANCES, 'butterfly.json'))
        self.assertEqual(N.arcs, butterfly().arcs)
        self.assertEqual(N.sources, [0, 1])
        self.assertEqual(N.sinks, [2, 3])
        self.assertEqual(N.intermediates, [4])

    def test_json_round_trip(self):
        from netclosure.netcode import NetworkInstance
        N = butterfly()
        data = json.loads(json.dumps(N.to_json()))
        self.assertEqual(NetworkInstance.from_json(data).arcs, N.arcs)

    def _rule(self, r, m, arcs, labels=None):
        from netclosure.errors import InvariantError
        from netclosure.netcode import NetworkInstance
        with self.assertRaises(InvariantError) as cm:
            NetworkInstance(r, m, arcs, labels)
        return cm.exception.rule

    def test_validation_rules(self):
        self.assertEqual(self._rule(0, 1, []), "network needs at least one source")
        self.assertEqual(self._rule(1, 0, [(0, 5)]), "node ids lie in [0, 2r + m)")
        self.assertEqual(self._rule(1, 1, [(2, 2), (0, 1)]), "links must join distinct nodes")
        self.assertEqual(self._rule(1, 2, [(0, 2), (2, 3), (3, 2), (3, 1)]), "network must be acyclic")
        self.assertEqual(self._rule(1, 1, [(2, 0), (0, 1)]), "sources have in-degree 0")
        self.assertEqual(self._rule(1, 1, [(1, 2), (0, 1)]), "sinks have out-degree 0")
        self.assertEqual(self._rule(1, 1, [(0, 2), (0, 1)]), "intermediate nodes need an outgoing link")
        self.assertEqual(
            self._rule(1, 0, [(0, 1)], {'sources': [1], 'sinks': [0]}), "sources are numbered 0..r-1")

    def test_format_errors(self):
        from netclosure.errors import FormatError
        from netclosure.netcode import NetworkInstance
        with self.assertRaises(FormatError):
            NetworkInstance.from_json([1, 2])
        with self.assertRaises(FormatError):
            NetworkInstance.from_json({'r': 1, 'arcs': []})


def test_to_guessing_digraph():
    from netclosure.digraph import Digraph, bidirectional_clique, rank_of
    from netclosure.netcode import NetworkInstance, to_guessing_digraph
    assert to_guessing_digraph(butterfly()) == bidirectional_clique(3)
    single = NetworkInstance(1, 1, [(0, 2), (2, 1)])
    D = to_guessing_digraph(single)
    assert D == Digraph(2, [(0, 1), (1, 0)])
    assert rank_of(D) == 1
    D = to_guessing_digraph(direct_links(3))
    assert D.loops == D.full
    assert rank_of(D) == 3


def test_conversion_preserves_counts():
    from netclosure.netcode import NetworkInstance, to_guessing_digraph
    rng = random.Random(50)
    for _ in range(20):
        r, m = rng.randint(1, 3), rng.randint(0, 4)
        # links run forward in a fixed topological order: sources, intermediates, sinks
        order = list(range(r)) + list(range(2 * r, 2 * r + m)) + list(range(r, 2 * r))
        arcs = set()
        for j in range(2 * r, 2 * r + m):
            later = order[order.index(j) + 1:]
            arcs.add((j, rng.choice(later)))
        for i, u in enumerate(order):
            for v in order[i + 1:]:
                if v >= r and not (r <= u < 2 * r) and rng.random() < 0.3:
                    arcs.add((u, v))
        N = NetworkInstance(r, m, arcs)
        D = to_guessing_digraph(N)
        assert D.n == r + m
        assert len(D.arcs) == len(N.arcs)


class TestSolveNetwork(unittest.TestCase):

    def test_butterfly(self):
        from netclosure.netcode import solve_network, verify_network_solution
        for q in (2, 3):
            solution = solve_network(butterfly(), q)
            self.assertTrue(solution.solvable)
            self.assertEqual(solution.reason, "solved")
            self.assertEqual(solution.rank, 2)
            self.assertEqual(solution.alpha, q * q)
            self.assertTrue(verify_network_solution(butterfly(), solution.coding_function, q))
            self.assertTrue(verify_network_solution(butterfly(), solution.coding_function, q, exact=True))

    def test_rank_deficit(self):
        from netclosure.netcode import NetworkInstance, solve_network
        N = NetworkInstance(2, 0, [(0, 3), (1, 2)])
        for q in (2, 3):
            solution = solve_network(N, q)
            self.assertFalse(solution.solvable)
            self.assertEqual(solution.reason, "rank deficit")
            self.assertEqual(solution.rank, 1)
            self.assertIsNone(solution.alpha)
            self.assertEqual(solution.to_json()['reason'], "rank deficit")

    def test_direct_links(self):
        from netclosure.netcode import solve_network, verify_network_solution
        from netclosure.partition import CodingFunction
        N = direct_links(2)
        solution = solve_network(N, 2)
        self.assertTrue(solution.solvable)
        identity = CodingFunction(2, 2, torch.tensor([[0, 1, 0, 1], [0, 0, 1, 1]]))
        self.assertTrue(verify_network_solution(N, identity, 2, exact=True))

    def test_solution_json(self):
        from netclosure.netcode import solve_network
        data = solve_network(butterfly(), 2).to_json()
        self.assertEqual(data['reason'], "solved")
        self.assertEqual(data['alpha'], 4)
        self.assertEqual(data['rank'], 2)


def test_repetition_is_not_a_solution():
    from netclosure.netcode import instantiate_functions, verify_network_solution
    from netclosure.partition import CodingFunction
    f = CodingFunction(2, 2, torch.tensor([[0, 0, 1, 1]] * 3))
    assert instantiate_functions(butterfly(), f) is None
    assert not verify_network_solution(butterfly(), f, 2)


def test_instantiated_protocol():
    from netclosure.netcode import instantiate_functions, solve_network
    solution = solve_network(butterfly(), 2)
    protocol = instantiate_functions(butterfly(), solution.coding_function)
    assert set(protocol.tables) == {2, 3, 4}
    assert protocol.inputs[4] == (0, 1)
    assert protocol.inputs[2] == (1, 4)
    assert len(protocol.tables[4]) == 4


def test_decoding_up_to_relabeling():
    from netclosure.netcode import Protocol, verify_protocol
    N = direct_links(1)
    flipped = Protocol(2, {1: (0,)}, {1: {(0,): 1, (1,): 0}})
    assert verify_protocol(N, flipped)
    assert not verify_protocol(N, flipped, exact=True)
    constant = Protocol(2, {1: (0,)}, {1: {(0,): 0, (1,): 0}})
    assert not verify_protocol(N, constant)


def test_butterfly_xor_protocol():
    from netclosure.netcode import Protocol, verify_protocol
    protocol = Protocol(2)
    protocol.inputs = {4: (0, 1), 2: (1, 4), 3: (0, 4)}
    xor = {(a, b): a ^ b for a in range(2) for b in range(2)}
    protocol.tables = {4: xor, 2: xor, 3: xor}
    assert verify_protocol(butterfly(), protocol, exact=True)


def test_verify_rejects_alphabet_mismatch():
    from netclosure.errors import InvariantError
    from netclosure.netcode import solve_network, verify_network_solution
    f = solve_network(butterfly(), 2).coding_function
    with pytest.raises(InvariantError):
        verify_network_solution(butterfly(), f, 3)


class TestProtocolOracle(unittest.TestCase):

    def test_examples(self):
        from netclosure.digraph import Digraph, bidirectional_clique, directed_cycle
        from netclosure.netcode import protocol_guessing_oracle
        self.assertEqual(protocol_guessing_oracle(bidirectional_clique(3), 2), 4)
        self.assertEqual(protocol_guessing_oracle(directed_cycle(3), 2), 2)
        self.assertEqual(protocol_guessing_oracle(Digraph(3, [(0, 1), (1, 2)]), 2), 1)

    def test_best_protocol_fixed_points(self):
        from netclosure.digraph import bidirectional_clique
        from netclosure.netcode import best_protocol
        count, protocol = best_protocol(bidirectional_clique(3), 2)
        self.assertEqual(len(protocol.fixed_points(3)), count)

    def test_guards(self):
        from netclosure.digraph import Digraph, bidirectional_clique
        from netclosure.errors import SizeLimitError
        from netclosure.netcode import protocol_guessing_oracle
        with self.assertRaises(SizeLimitError):
            protocol_guessing_oracle(Digraph(5), 2)
        with self.assertRaises(SizeLimitError):
            protocol_guessing_oracle(bidirectional_clique(4), 2)


def test_oracle_agrees_with_alpha_exhaustive():
    from netclosure.closure import from_digraph
    from netclosure.netcode import protocol_guessing_oracle
    from netclosure.solvegraph import alpha, build
    for n in range(1, 4):
        for D in all_digraphs(n):
            assert protocol_guessing_oracle(D, 2) == alpha(build(from_digraph(D), 2))[0], D


def test_oracle_agrees_with_alpha_sampled():
    from netclosure.closure import from_digraph
    from netclosure.digraph import popcount
    from netclosure.netcode import protocol_guessing_oracle
    from netclosure.solvegraph import alpha, build
    rng = random.Random(51)
    seen = set()
    while len(seen) < 25:
        D = random_digraph(rng, 4, p=0.3, loops=rng.random() < 0.3)
        if D in seen or max(popcount(m) for m in D.in_masks) > 2:
            continue
        assert protocol_guessing_oracle(D, 2) == alpha(build(from_digraph(D), 2))[0], D
        seen.add(D)


def test_butterfly_round_trip():
    from netclosure.closure import from_digraph
    from netclosure.netcode import protocol_guessing_oracle, solve_network, to_guessing_digraph
    from netclosure.solvegraph import alpha, build
    N = butterfly()
    D = to_guessing_digraph(N)
    solution = solve_network(N, 2)
    assert solution.solvable
    assert protocol_guessing_oracle(D, 2) == alpha(build(from_digraph(D), 2))[0] == 4
