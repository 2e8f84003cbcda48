"""
Tests for the reduced degree-state model.
"""
import math
import unittest

import numpy as np

from brwsearch.core.errors import DomainError, ModelInfeasibleError
from brwsearch.core.graph import (
    ConditionalDegreeMatrix,
    Graph,
    conditional_degree_matrix,
    degree_profile,
    joint_degree_matrix,
)
from brwsearch.core.reduced import (
    approximate_matrix,
    averaged_matrix,
    biased_degree_distribution,
    build_reduced_chain,
    degree_start_distribution,
    enumeration_size,
    enumeration_terms,
    matrix_gap,
    model_absorption,
    multinomial_support,
)
from brwsearch.core.walker import full_chain_absorption
from tests.helpers import lollipop, multinomial_oracle, six_node_example, star, triangle


def approx_for(graph: Graph, beta: float, **kwargs):
    """Approximate matrix of a graph."""
    profile = degree_profile(graph)
    conditional = conditional_degree_matrix(joint_degree_matrix(graph, profile))
    return approximate_matrix(conditional, beta, profile, **kwargs)


class TestBiasedDegreeDistribution(unittest.TestCase):
    """Tests for biased_degree_distribution."""

    def test_uniform(self):
        """Test that beta=0 gives the neighbor fractions."""
        np.testing.assert_allclose(
            biased_degree_distribution([1, 3, 0], [1, 2, 3], 0.0), [0.25, 0.75, 0.0]
        )

    def test_biased(self):
        """Test weights n_l * l^beta."""
        np.testing.assert_allclose(
            biased_degree_distribution([1, 1], [2, 3], 2.0), [4 / 13, 9 / 13]
        )

    def test_large_beta(self):
        """Test that a huge exponent concentrates on the largest degree."""
        p = biased_degree_distribution([5, 1], [2, 3], 1e4)
        self.assertTrue(np.isfinite(p).all())
        self.assertAlmostEqual(p[1], 1.0)

    def test_empty(self):
        """Test that an empty neighborhood is rejected."""
        with self.assertRaises(DomainError):
            biased_degree_distribution([0, 0], [1, 2], 1.0)


class TestMultinomialSupport(unittest.TestCase):
    """Tests for multinomial_support."""

    def test_order(self):
        """Test the descending-first-part order."""
        self.assertEqual(
            list(multinomial_support(2, [2, 3])), [(2, 0), (1, 1), (0, 2)]
        )

    def test_count(self):
        """Test that the count matches the stars-and-bars formula."""
        comps = list(multinomial_support(3, [1, 2, 3]))
        self.assertEqual(len(comps), enumeration_size(3, 3))
        self.assertEqual(len(comps), 10)
        self.assertTrue(all(sum(c) == 3 for c in comps))
        self.assertEqual(len(set(comps)), 10)

    def test_budget(self):
        """Test that an oversized enumeration raises before yielding."""
        with self.assertRaises(ModelInfeasibleError) as cm:
            next(multinomial_support(30, list(range(1, 11)), budget=1000))
        self.assertEqual(cm.exception.terms, math.comb(39, 9))

    def test_invalid(self):
        """Test that k < 1 and empty supports are rejected."""
        with self.assertRaises(DomainError):
            next(multinomial_support(0, [1]))
        with self.assertRaises(DomainError):
            next(multinomial_support(2, []))


class TestTransitionMatrices(unittest.TestCase):
    """Tests for the averaged and approximate degree transition matrices."""

    def test_lollipop_approximate(self):
        """Test the multinomial expectation on the lollipop degree-2 row."""
        p = approx_for(lollipop(), 1.0)
        self.assertAlmostEqual(p.entry(2, 3), 0.55)
        self.assertAlmostEqual(p.entry(2, 2), 0.45)
        self.assertAlmostEqual(p.entry(1, 3), 1.0)
        self.assertEqual(p.term_count, 1 + 3 + 4)

    def test_lollipop_averaged(self):
        """Test the class average on the lollipop degree-2 row."""
        p = averaged_matrix(lollipop(), 1.0)
        self.assertAlmostEqual(p.entry(2, 3), 0.6)
        self.assertAlmostEqual(p.entry(3, 1), 0.2)

    def test_zero_beta_is_conditional(self):
        """Test that both matrices equal the conditional degree matrix at beta=0."""
        graph = six_node_example()
        conditional = conditional_degree_matrix(joint_degree_matrix(graph))
        np.testing.assert_allclose(approx_for(graph, 0.0).matrix, conditional.matrix, atol=1e-12)
        np.testing.assert_allclose(
            averaged_matrix(graph, 0.0).matrix, conditional.matrix, atol=1e-12
        )
        self.assertAlmostEqual(matrix_gap(graph, 0.0), 0.0, places=12)

    def test_row_stochastic(self):
        """Test that every row sums to one."""
        for beta in (0.0, 0.5, 3.0, 50.0):
            p = approx_for(six_node_example(), beta)
            np.testing.assert_allclose(p.matrix.sum(axis=1), 1.0, atol=1e-12)
            q = averaged_matrix(six_node_example(), beta)
            np.testing.assert_allclose(q.matrix.sum(axis=1), 1.0, atol=1e-12)

    def test_support_respected(self):
        """Test that zero conditional entries stay zero."""
        graph = six_node_example()
        conditional = conditional_degree_matrix(joint_degree_matrix(graph))
        p = approx_for(graph, 2.0)
        self.assertTrue((p.matrix[conditional.matrix == 0] == 0).all())

    def test_skip_absorbing(self):
        """Test that skipping leaves a unit row for d_max."""
        p = approx_for(six_node_example(), 1.0, skip_absorbing=True)
        np.testing.assert_array_equal(p.row(4), [0, 0, 0, 1])
        self.assertEqual(p.term_count, enumeration_terms(six_node_example()))

    def test_budget(self):
        """Test that the total enumeration is checked against the budget."""
        with self.assertRaises(ModelInfeasibleError):
            approx_for(six_node_example(), 1.0, budget=3)

    def test_negative_beta(self):
        """Test that negative exponents are rejected."""
        with self.assertRaises(DomainError):
            approx_for(lollipop(), -0.5)

    def test_build_reduced_chain(self):
        """Test that d_max is the only absorbing degree."""
        graph = six_node_example()
        chain = build_reduced_chain(averaged_matrix(graph, 1.0), degree_profile(graph))
        self.assertEqual(chain.absorbing, (4,))
        self.assertEqual(chain.transient, (1, 2, 3))


class TestModelAbsorption(unittest.TestCase):
    """Tests for model_absorption."""

    def test_lollipop_uniform(self):
        """Test that the model is exact on the lollipop at beta=0."""
        result = model_absorption(lollipop(), 0.0)
        self.assertAlmostEqual(result.mean, 5 / 3)
        self.assertAlmostEqual(result.variance, 14 / 9)
        self.assertAlmostEqual(result.mean, full_chain_absorption(lollipop(), 0.0).mean)

    def test_lollipop_biased(self):
        """Test the approximate and averaged models at beta=1."""
        approx = model_absorption(lollipop(), 1.0)
        self.assertAlmostEqual(approx.mean, 1 / 3 + (2 / 3) / 0.55)
        averaged = model_absorption(lollipop(), 1.0, matrix="averaged")
        self.assertAlmostEqual(averaged.mean, 1 / 3 + (2 / 3) / 0.6)
        self.assertEqual(averaged.matrix, "averaged")

    def test_star(self):
        """Test that star leaves are one step from the hub."""
        result = model_absorption(star(), 2.0)
        self.assertAlmostEqual(result.mean, 1.0)
        self.assertAlmostEqual(result.std, 0.0)

    def test_star_all_starts(self):
        """Test the start mode that includes the hub."""
        result = model_absorption(star(), 0.0, start_mode="all")
        self.assertAlmostEqual(result.mean, 0.8)
        self.assertAlmostEqual(result.variance, 0.16)

    def test_regular(self):
        """Test that regular graphs are already absorbed."""
        result = model_absorption(triangle(), 1.0)
        self.assertTrue(result.no_transient)
        self.assertEqual(result.mean, 0.0)

    def test_infeasible(self):
        """Test that a tiny budget makes the model infeasible."""
        with self.assertRaises(ModelInfeasibleError):
            model_absorption(six_node_example(), 1.0, budget=2)

    def test_summary_dict(self):
        """Test the JSON summary keys."""
        self.assertEqual(
            list(model_absorption(star(), 1.0).summary_dict()),
            ["beta", "E_T", "Std_T", "feasible", "term_count"],
        )

    def test_degree_start_distribution(self):
        """Test the transient restriction of the degree distribution."""
        profile = degree_profile(lollipop())
        np.testing.assert_allclose(
            degree_start_distribution(profile), [1 / 3, 2 / 3, 0.0]
        )
        np.testing.assert_allclose(
            degree_start_distribution(profile, "custom", {3: 1.0, 0: 1.0}), [0.5, 0.5, 0.0]
        )


class TestMultinomialOracle(unittest.TestCase):
    """Tests of the enumerated expectation against multinomial sampling."""

    def test_random_rows(self):
        """Test random conditional rows for k <= 6."""
        rng = np.random.default_rng(12)
        degree_set = (1, 2, 3, 4, 5, 6)
        rows = rng.dirichlet(np.ones(len(degree_set)), size=len(degree_set))
        conditional = ConditionalDegreeMatrix(rows, degree_set)
        profile = degree_profile(star())
        for beta in (0.5, 2.0):
            p = approximate_matrix(conditional, beta, profile)
            np.testing.assert_allclose(p.matrix.sum(axis=1), 1.0, atol=1e-10)
            for i, k in enumerate(degree_set):
                mean, se = multinomial_oracle(rows[i], degree_set, k, beta, 50000, i)
                np.testing.assert_array_less(np.abs(p.matrix[i] - mean), 4 * se + 1e-12)
