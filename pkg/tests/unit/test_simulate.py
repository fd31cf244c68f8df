#!/usr/bin/env python3
"""
Simulation Test Module

Tests MAP decoding, exact and Monte Carlo error probabilities (with and
without a noisy channel) and the Fano check.
"""
import os
import sys
import math
import logging
import unittest

import numpy as np

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

# Add the project root to the Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import oracle
import simulate
import synthesis
from code_model import (
    Alphabet, DeterministicCode, Prior, StochasticChannel, default_referents, default_signals
)
from config import config
from error_handler import AlignmentError, ValidationError
from simulate import DecodeRule


def and_gate():
    return DeterministicCode(Alphabet(('00', '01', '10', '11')), Alphabet(('0', '1')), (0, 0, 0, 1))


def balanced4():
    return synthesis.balanced_partition_code(4)


def four_sigma(p, trials):
    return 4 * math.sqrt(p * (1 - p) / trials)


class TestMapDecoder(unittest.TestCase):
    """MAP rule construction."""

    def test_001_identity_inverts(self):
        code = DeterministicCode(default_referents(4), default_signals(4), (2, 0, 3, 1))
        rule = simulate.map_decoder(code, Prior.uniform(4))
        self.assertEqual(dict(rule.table), {2: 0, 0: 1, 3: 2, 1: 3})

    def test_002_and_gate_lowest_index_tie_break(self):
        rule = simulate.map_decoder(and_gate(), Prior.uniform(4))
        self.assertEqual(dict(rule.table), {0: 0, 1: 3})
        self.assertEqual(rule.decode('0'), '00')
        self.assertEqual(rule.decode('1'), '11')

    def test_003_skewed_prior(self):
        rule = simulate.map_decoder(balanced4(), Prior([0.4, 0.1, 0.1, 0.4]))
        self.assertEqual(dict(rule.table), {0: 0, 1: 3})

    def test_004_unused_signals_are_not_covered(self):
        code = DeterministicCode(default_referents(2), default_signals(3), (0, 2))
        rule = simulate.map_decoder(code, Prior.uniform(2))
        self.assertEqual(sorted(rule.table), [0, 2])
        self.assertIsNone(rule.decode('s1'))

    def test_005_rule_validation(self):
        with self.assertRaises(ValidationError):
            DecodeRule({5: 0}, default_signals(2), default_referents(2))


class TestExactError(unittest.TestCase):
    """Closed-form decoding error."""

    def test_001_known_values(self):
        prior = Prior.uniform(4)
        cases = [
            (synthesis.extreme_code('one_to_one', 4), 0.0),
            (balanced4(), 0.5),
            (synthesis.extreme_code('all_to_one', 4), 0.75),
        ]
        for code, expected in cases:
            rule = simulate.map_decoder(code, prior)
            self.assertAlmostEqual(simulate.exact_error(code, prior, rule), expected, places=12)

    def test_002_missing_signal(self):
        rule = DecodeRule({0: 0}, default_signals(2), default_referents(4))
        with self.assertRaises(ValidationError) as ctx:
            simulate.exact_error(balanced4(), Prior.uniform(4), rule)
        self.assertEqual(ctx.exception.details['field'], 'rule')

    def test_003_map_is_optimal(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            n, m = int(rng.integers(2, 7)), int(rng.integers(1, 5))
            code = DeterministicCode(default_referents(n), default_signals(m),
                                     tuple(int(k) for k in rng.integers(0, m, size=n)))
            probabilities = rng.dirichlet(np.ones(n))
            prior = Prior(probabilities / probabilities.sum())
            best = simulate.exact_error(code, prior, simulate.map_decoder(code, prior))
            self.assertAlmostEqual(best, oracle.map_error(oracle.joint_table(code.assignment, prior.probabilities.tolist(), m)),
                                   delta=1e-12)
            for _ in range(100):
                alternative = DecodeRule({k: int(rng.integers(0, n)) for k in range(m)}, code.signals, code.referents)
                self.assertLessEqual(best, simulate.exact_error(code, prior, alternative) + 1e-12)

    def test_004_noiseless_rule_through_flip(self):
        code = balanced4()
        prior = Prior.uniform(4)
        channel = StochasticChannel.symmetric_flip(code.signals, 0.1)
        rule = simulate.map_decoder(code, prior)
        self.assertAlmostEqual(simulate.exact_error_through_channel(code, prior, channel, rule), 0.55, places=12)
        composed_rule = simulate.map_decoder_through_channel(code, prior, channel)
        self.assertEqual(composed_rule.basis, simulate.COMPOSED)
        self.assertAlmostEqual(simulate.exact_error_through_channel(code, prior, channel, composed_rule), 0.55,
                               places=12)

    def test_005_rule_over_wrong_signals(self):
        code = balanced4()
        channel = StochasticChannel([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5]])
        rule = simulate.map_decoder(code, Prior.uniform(4))
        with self.assertRaises(AlignmentError):
            simulate.exact_error_through_channel(code, Prior.uniform(4), channel, rule)


class TestMonteCarlo(unittest.TestCase):
    """Seeded transmission simulation."""

    def test_001_balanced_within_window(self):
        code, prior = balanced4(), Prior.uniform(4)
        report = simulate.monte_carlo_error(code, prior, simulate.map_decoder(code, prior), trials=100000, seed=7)
        self.assertEqual(report.trials, 100000)
        self.assertEqual(report.empirical_error, report.errors / report.trials)
        self.assertAlmostEqual(report.exact_map_error, 0.5, places=12)
        self.assertLessEqual(abs(report.empirical_error - 0.5), four_sigma(0.5, 100000))
        self.assertAlmostEqual(report.fano_bound, 0.1893, places=3)

    def test_002_identity_never_errs(self):
        code = synthesis.extreme_code('one_to_one', 5)
        prior = Prior([0.1, 0.2, 0.3, 0.15, 0.25])
        report = simulate.monte_carlo_error(code, prior, simulate.map_decoder(code, prior), trials=5000, seed=1)
        self.assertEqual(report.errors, 0)

    def test_003_zero_probability_referents_are_never_drawn(self):
        code = DeterministicCode(default_referents(3), default_signals(2), (0, 0, 1))
        prior = Prior([0.0, 0.5, 0.5])
        rule = DecodeRule({0: 1, 1: 2}, code.signals, code.referents)
        report = simulate.monte_carlo_error(code, prior, rule, trials=5000, seed=2)
        self.assertEqual(report.errors, 0)

    def test_004_deterministic_and_partition_independent(self):
        code, prior = and_gate(), Prior.uniform(4)
        rule = simulate.map_decoder(code, prior)
        first = simulate.monte_carlo_error(code, prior, rule, trials=20000, seed=99)
        second = simulate.monte_carlo_error(code, prior, rule, trials=20000, seed=99)
        threaded = simulate.monte_carlo_error(code, prior, rule, trials=20000, seed=99, workers=4)
        self.assertEqual(first, second)
        self.assertEqual(first.errors, threaded.errors)

    def test_005_prefix_of_trials_is_stable(self):
        code, prior = and_gate(), Prior.uniform(4)
        rule = simulate.map_decoder(code, prior)
        block = config.get_int('MC_BLOCK')
        whole = simulate.monte_carlo_error(code, prior, rule, trials=2 * block, seed=5)
        first_half = simulate.monte_carlo_error(code, prior, rule, trials=block, seed=5)
        self.assertLessEqual(first_half.errors, whole.errors)

    def test_006_through_flip_channel(self):
        code, prior = balanced4(), Prior.uniform(4)
        channel = StochasticChannel.symmetric_flip(code.signals, 0.1)
        report = simulate.monte_carlo_error(code, prior, simulate.map_decoder(code, prior), trials=100000, seed=7,
                                            channel=channel)
        self.assertTrue(report.channel)
        self.assertEqual(report.decoder_basis, simulate.NOISELESS)
        self.assertAlmostEqual(report.exact_error, 0.55, places=12)
        self.assertLessEqual(abs(report.empirical_error - 0.55), four_sigma(0.55, 100000))
        self.assertGreaterEqual(report.exact_map_error, report.fano_bound - 1e-9)

    def test_007_invalid_trials(self):
        code, prior = balanced4(), Prior.uniform(4)
        with self.assertRaises(ValidationError):
            simulate.monte_carlo_error(code, prior, simulate.map_decoder(code, prior), trials=0, seed=1)


class TestFanoCheck(unittest.TestCase):
    """Fano check and the rewritten bound forms."""

    def test_001_balanced_four(self):
        check = simulate.fano_check(balanced4(), Prior.uniform(4))
        self.assertAlmostEqual(check.exact_map_error, 0.5, places=12)
        self.assertAlmostEqual(check.fano_bound, 0.1893, places=3)
        self.assertTrue(check.satisfies_symmetry)
        self.assertAlmostEqual(check.symmetry_form_bound, 0.0, places=12)
        self.assertAlmostEqual(check.half_entropy_form_bound, 0.0, places=12)
        self.assertTrue(check.equiprobable_floor)

    def test_002_one_to_one(self):
        check = simulate.fano_check(synthesis.extreme_code('one_to_one', 4), Prior.uniform(4))
        self.assertEqual(check.exact_map_error, 0.0)
        self.assertEqual(check.fano_bound, 0.0)
        self.assertFalse(check.satisfies_symmetry)
        self.assertIsNone(check.symmetry_form_bound)
        self.assertFalse(check.equiprobable_floor)

    def test_003_balanced_nine(self):
        check = simulate.fano_check(synthesis.balanced_partition_code(9), Prior.uniform(9))
        self.assertAlmostEqual(check.exact_map_error, 2 / 3, places=12)
        self.assertTrue(check.equiprobable_floor)
        self.assertLessEqual(check.symmetry_form_bound, check.exact_map_error)
        self.assertAlmostEqual(check.symmetry_form_bound,
                               (math.log2(3) - oracle.binary_entropy(2 / 3)) / math.log2(8), places=10)

    def test_004_non_uniform_prior_has_no_floor_flag(self):
        check = simulate.fano_check(balanced4(), Prior([0.4, 0.1, 0.1, 0.4]))
        self.assertIsNone(check.equiprobable_floor)
        self.assertAlmostEqual(check.exact_map_error, 0.2, places=12)


if __name__ == '__main__':
    unittest.main()
