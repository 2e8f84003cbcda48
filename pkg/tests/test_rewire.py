"""
Tests for degree-preserving rewiring.
"""
import unittest

import numpy as np
from pydantic import ValidationError

from brwsearch.core.errors import GraphError
from brwsearch.core.generators import ErSpec, generate_er
from brwsearch.core.graph import Graph, assortativity
from brwsearch.core.rewire import (
    AssortativityState,
    RewireConfig,
    incremental_assortativity,
    reconnect_components,
    rewire_and_reconnect,
    rewire_to_target,
)
from tests.helpers import lollipop, six_node_example, star


def er_graph(seed: int = 2) -> Graph:
    """Sparse random graph used by the rewiring tests."""
    return generate_er(ErSpec(n=300, p=0.02, seed=seed))


class TestRewireConfig(unittest.TestCase):
    """Tests for RewireConfig."""

    def test_target_range(self):
        """Test that targets outside [-1, 1] are rejected."""
        with self.assertRaises(ValidationError):
            RewireConfig(target_alpha=1.5)

    def test_mode(self):
        """Test that only known modes are accepted."""
        self.assertEqual(RewireConfig(target_alpha=0.0).mode, "best")
        with self.assertRaises(ValidationError):
            RewireConfig(target_alpha=0.0, mode="greedy")


class TestIncrementalAssortativity(unittest.TestCase):
    """Tests for the constant-time swap update."""

    def test_six_node_swap(self):
        """Test a single swap against a full recomputation."""
        graph = six_node_example()
        state = AssortativityState.from_graph(graph)
        removed = [(0, 4), (1, 3)]
        added = [(0, 3), (1, 4)]
        swapped = graph.with_edges(
            [e for e in graph.edges if e not in removed] + added
        )
        self.assertAlmostEqual(
            incremental_assortativity(state, removed, added),
            assortativity(swapped),
            places=12,
        )
        self.assertEqual(list(swapped.degrees), list(graph.degrees))

    def test_swap_back(self):
        """Test that undoing a swap restores the sums exactly."""
        state = AssortativityState.from_graph(six_node_example())
        removed = [(0, 4), (1, 3)]
        added = [(0, 3), (1, 4)]
        self.assertEqual(state.apply(removed, added).apply(added, removed), state)

    def test_random_swaps(self):
        """Test a chain of random valid swaps against full recomputation."""
        graph = er_graph(4)
        rng = np.random.default_rng(0)
        state = AssortativityState.from_graph(graph)
        checked = 0
        while checked < 40:
            edges = list(graph.edges)
            i, j = rng.integers(0, len(edges), size=2)
            (a, b), (c, d) = edges[i], edges[j]
            if len({a, b, c, d}) < 4:
                continue
            added = [tuple(sorted((a, c))), tuple(sorted((b, d)))]
            if any(graph.has_edge(u, v) for u, v in added):
                continue
            removed = [edges[i], edges[j]]
            graph = graph.with_edges([e for e in edges if e not in removed] + added)
            state = state.apply(removed, added)
            self.assertAlmostEqual(state.alpha, assortativity(graph), places=10)
            checked += 1


class TestRewireToTarget(unittest.TestCase):
    """Tests for rewire_to_target."""

    def test_already_within_eps(self):
        """Test that no proposal is made when the target is already met."""
        graph = six_node_example()
        result = rewire_to_target(graph, RewireConfig(target_alpha=-0.52, eps=0.01))
        self.assertTrue(result.converged)
        self.assertEqual(result.proposals, 0)
        self.assertEqual(result.graph, graph)

    def test_no_valid_swap(self):
        """Test that a star cannot be rewired and reports non-convergence."""
        result = rewire_to_target(
            star(), RewireConfig(target_alpha=0.5, max_proposals=100)
        )
        self.assertFalse(result.converged)
        self.assertEqual(result.proposals, 100)
        self.assertEqual(result.accepted, 0)
        self.assertAlmostEqual(result.achieved_alpha, -1.0)

    def test_lollipop_stuck(self):
        """Test that every lollipop swap would duplicate an edge."""
        result = rewire_to_target(
            lollipop(), RewireConfig(target_alpha=0.0, max_proposals=50)
        )
        self.assertEqual(result.accepted, 0)
        self.assertEqual(result.graph, lollipop())

    def test_too_few_edges(self):
        """Test that a single edge cannot be rewired."""
        with self.assertRaises(GraphError):
            rewire_to_target(Graph(2, [(0, 1)]), RewireConfig(target_alpha=0.0))

    def test_reaches_targets(self):
        """Test convergence toward positive and negative targets."""
        graph = er_graph()
        for target in (0.2, -0.2):
            for mode in ("best", "single"):
                cfg = RewireConfig(
                    target_alpha=target, eps=0.01, max_proposals=200000, seed=3, mode=mode
                )
                result = rewire_to_target(graph, cfg)
                self.assertTrue(result.converged, f"{target} {mode}")
                self.assertLessEqual(abs(result.achieved_alpha - target), 0.01)
                self.assertAlmostEqual(
                    assortativity(result.graph), result.achieved_alpha, places=9
                )
                np.testing.assert_array_equal(result.graph.degrees, graph.degrees)
                self.assertEqual(result.graph.m, graph.m)

    def test_seeded(self):
        """Test that equal seeds give equal rewired graphs."""
        cfg = RewireConfig(target_alpha=0.1, eps=0.005, max_proposals=50000, seed=8)
        a = rewire_to_target(er_graph(), cfg)
        b = rewire_to_target(er_graph(), cfg)
        self.assertEqual(a.graph, b.graph)
        self.assertEqual(a.proposals, b.proposals)


class TestReconnect(unittest.TestCase):
    """Tests for reconnect_components and rewire_and_reconnect."""

    def test_reconnect(self):
        """Test that one bridge per small component connects the graph."""
        graph = Graph(7, [(0, 1), (1, 2), (3, 4), (5, 6)])
        connected = reconnect_components(graph, seed=1)
        self.assertTrue(connected.is_connected())
        self.assertEqual(connected.m, graph.m + 2)
        self.assertEqual(reconnect_components(graph, seed=1), connected)

    def test_connected_unchanged(self):
        """Test that a connected graph is left alone."""
        graph = six_node_example()
        self.assertIs(reconnect_components(graph, seed=0), graph)

    def test_rewire_and_reconnect(self):
        """Test the report of a full rewire-and-reconnect run."""
        graph = er_graph()
        cfg = RewireConfig(target_alpha=-0.3, eps=0.01, max_proposals=200000, seed=5)
        connected, report = rewire_and_reconnect(graph, cfg)
        self.assertTrue(connected.is_connected())
        self.assertEqual(report.target, -0.3)
        self.assertEqual(connected.m, graph.m + report.bridges)
        self.assertAlmostEqual(report.achieved_post_connect, assortativity(connected), places=9)
        self.assertEqual(
            set(report.summary_dict()),
            {"target", "achieved_pre_connect", "achieved_post_connect", "proposals", "converged"},
        )

    def test_no_reconnect(self):
        """Test that reconnection can be switched off."""
        graph = Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5)])
        cfg = RewireConfig(target_alpha=0.0, max_proposals=10, reconnect=False)
        result, report = rewire_and_reconnect(graph, cfg)
        self.assertEqual(report.bridges, 0)
        self.assertEqual(report.achieved_pre_connect, report.achieved_post_connect)
