"""
Tests for seed derivation.
"""
import unittest

import numpy as np

from brwsearch.core.seeding import child_rng, derive_seed, trial_rng


class TestSeeding(unittest.TestCase):
    """Tests for derive_seed and the trial generators."""

    def test_derive_seed_deterministic(self):
        """Test that the same key path gives the same seed."""
        self.assertEqual(derive_seed(42, 1, 2), derive_seed(42, 1, 2))

    def test_derive_seed_distinct(self):
        """Test that different masters and key paths give different seeds."""
        seeds = {
            derive_seed(42),
            derive_seed(42, 0),
            derive_seed(42, 1),
            derive_seed(42, 0, 1),
            derive_seed(42, 0, 0),
            derive_seed(43, 0),
        }
        self.assertEqual(len(seeds), 6)

    def test_trailing_zero_keys(self):
        """Test that a zero key is not confused with a missing one."""
        self.assertNotEqual(derive_seed(1), derive_seed(1, 0))
        self.assertNotEqual(derive_seed(1, 0), derive_seed(1, 0, 0))
        self.assertNotEqual(
            trial_rng(9, 0).random(), np.random.default_rng(9).random()
        )

    def test_derive_seed_range(self):
        """Test that derived seeds are non-negative 63-bit integers."""
        for key in range(50):
            seed = derive_seed(7, key)
            self.assertIsInstance(seed, int)
            self.assertGreaterEqual(seed, 0)
            self.assertLess(seed, 1 << 63)

    def test_trial_rng_reproducible(self):
        """Test that a trial's stream does not depend on creation order."""
        later = [trial_rng(5, i).random() for i in (3, 0, 1)]
        first = [trial_rng(5, i).random() for i in (0, 1, 3)]
        self.assertEqual(later, [first[2], first[0], first[1]])
        self.assertEqual(trial_rng(5, 2).random(), child_rng(5, 2).random())
