#!/usr/bin/env python3
"""
Acceptance Tests

End-to-end checks of the toolkit's headline properties, each with the
runtime ceiling it is expected to meet on a laptop:
- Symmetric codes carry exactly half of the referent entropy
- Symmetric codes are necessarily ambiguous and irreversible
- Exhaustive count of symmetric codes for four referents and signals
- Error floor of the balanced-partition family
- Fano inequality over random codes and priors
- Strict information loss through noisy channels
- Reversibility correspondences and the tagging construction
- Landauer accounting for the AND gate
- Agreement with the brute-force oracle
- Byte-identical command-line reports
"""
import io
import os
import sys
import math
import time
import functools
import logging
import unittest

import numpy as np

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

# Add the project root to the Python path
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, PROJECT_ROOT)
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import oracle
import cli
import code_model
import info_measures
import simulate
import synthesis
from code_model import (
    DeterministicCode, Prior, StochasticChannel, default_referents, default_signals, joint_distribution
)
from synthesis import SynthesisConfig

BOLTZMANN = 1.38e-23


def random_code(rng, max_n, max_m):
    n, m = int(rng.integers(1, max_n + 1)), int(rng.integers(1, max_m + 1))
    assignment = tuple(int(k) for k in rng.integers(0, m, size=n))
    probabilities = rng.dirichlet(np.ones(n))
    return DeterministicCode(default_referents(n), default_signals(m), assignment), Prior(probabilities / probabilities.sum())


class Stopwatch:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        logger.info(f"elapsed {self.elapsed:.3f}s")
        return False


@functools.lru_cache(maxsize=None)
def annealed_nine():
    """First annealed 9x9 code on the uniform prior that meets the symmetry equation, or None."""
    for seed in range(9, 14):
        result = synthesis.synthesize(SynthesisConfig(n=9, m=9, method='anneal', seed=seed, anneal_steps=20000))
        if result.residuals[0] <= 1e-9:
            return result.codes[0]
    return None


def symmetric_outputs():
    """Every synthesized code within 1e-9 of the symmetry equation, with its prior."""
    outputs = []
    result = synthesis.enumerate_codes(SynthesisConfig(n=4, m=4, method='exhaustive', tolerance=1e-9))
    outputs.extend((code, Prior.uniform(4)) for code, r in zip(result.codes, result.residuals) if r <= 1e-9)
    outputs.append((synthesis.balanced_partition_code(9), Prior.uniform(9)))
    if annealed_nine() is not None:
        outputs.append((annealed_nine(), Prior.uniform(9)))

    rng = np.random.default_rng(2024)
    for _ in range(20):
        n, m = int(rng.integers(1, 7)), int(rng.integers(1, 5))
        result = synthesis.enumerate_codes(SynthesisConfig(n=n, m=m, method='exhaustive', tolerance=1e-9))
        outputs.extend((code, Prior.uniform(n)) for code, r in zip(result.codes, result.residuals) if r <= 1e-9)
    return outputs


class TestAcceptance(unittest.TestCase):
    """Headline properties."""

    def test_001_symmetry_gives_half_information(self):
        with Stopwatch() as watch:
            outputs = symmetric_outputs()
            self.assertIsNotNone(annealed_nine())
            self.assertGreater(len(outputs), 36)
            for code, prior in outputs:
                report = info_measures.info_report(joint_distribution(code, prior))
                gap_s, gap_i = report.half_information_gaps()
                self.assertLessEqual(gap_s, 1e-9)
                self.assertLessEqual(gap_i, 1e-9)
        self.assertLess(watch.elapsed, 5.0)

    def test_002_symmetry_needs_ambiguity(self):
        for code, prior in symmetric_outputs():
            report = info_measures.info_report(joint_distribution(code, prior))
            if report.h_omega <= 0:
                continue
            self.assertGreaterEqual(report.h_omega_given_s, report.h_omega / 2 - 1e-9)
            self.assertGreater(report.h_omega_given_s, 0)
            self.assertEqual(report.ambiguity_class, info_measures.AMBIGUOUS)
            self.assertFalse(report.reversible)
            self.assertFalse(code_model.is_logically_reversible(code, prior))

    def test_003_exhaustive_count(self):
        with Stopwatch() as watch:
            result = synthesis.enumerate_codes(SynthesisConfig(n=4, m=4, method='exhaustive', tolerance=1e-9))
        self.assertEqual(result.explored, 256)
        self.assertEqual(len(result.codes), 36)
        self.assertEqual(len(result.codes), oracle.balanced_pair_count(4, 4))
        self.assertEqual(len(oracle.symmetric_codes(4, 4, [0.25] * 4)), 36)
        self.assertLess(watch.elapsed, 1.0)

    def test_004_balanced_error_floor(self):
        with Stopwatch() as watch:
            for n in (4, 9, 16, 25):
                code, prior = synthesis.balanced_partition_code(n), Prior.uniform(n)
                error = simulate.exact_error(code, prior, simulate.map_decoder(code, prior))
                self.assertAlmostEqual(error, 1 - 1 / math.sqrt(n), delta=1e-12)
                self.assertGreaterEqual(error, 0.5)
            code, prior = synthesis.balanced_partition_code(4), Prior.uniform(4)
            report = simulate.monte_carlo_error(code, prior, simulate.map_decoder(code, prior), trials=100000, seed=7)
            self.assertLessEqual(abs(report.empirical_error - 0.5), 0.0064)
        self.assertLess(watch.elapsed, 2.0)

    def test_005_fano_never_violated(self):
        rng = np.random.default_rng(5)
        with Stopwatch() as watch:
            for _ in range(1000):
                code, prior = random_code(rng, 8, 8)
                joint = joint_distribution(code, prior)
                error = simulate.exact_error(code, prior, simulate.map_decoder(code, prior))
                bound = info_measures.fano_lower_bound(info_measures.conditional_entropy(joint), code.n)
                self.assertGreaterEqual(error, bound - 1e-9)
        self.assertLess(watch.elapsed, 5.0)

    def test_006_noise_loses_information(self):
        code, prior = synthesis.balanced_partition_code(4), Prior.uniform(4)
        previous = info_measures.mutual_information(joint_distribution(code, prior))
        self.assertAlmostEqual(previous, 1.0, places=12)
        for epsilon in (0.01, 0.05, 0.1):
            channel = StochasticChannel.symmetric_flip(code.signals, epsilon)
            mi = info_measures.mutual_information(code_model.compose_with_channel(code, prior, channel))
            self.assertLess(mi, 1.0)
            self.assertLess(mi, previous)
            previous = mi

    def test_007_reversibility_correspondence(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            code, prior = random_code(rng, 6, 6)
            h = info_measures.conditional_entropy(joint_distribution(code, prior))
            self.assertEqual(code_model.is_logically_reversible(code, prior), h <= 1e-12)
            tagged = code_model.reversibilize(code)
            self.assertTrue(code_model.is_logically_reversible(tagged, prior))
            self.assertEqual(code_model.strip_tags(tagged, code.signals).assignment, code.assignment)

    def test_008_landauer_and_gate(self):
        code = DeterministicCode(default_referents(4), default_signals(2), (0, 0, 0, 1))
        h = info_measures.conditional_entropy(joint_distribution(code, Prior.uniform(4)))
        report = info_measures.landauer(h, 300.0)
        independent_h = oracle.measures(oracle.joint_table((0, 0, 0, 1), [0.25] * 4, 2))['h_omega_given_s']
        independent_entropy = BOLTZMANN * math.log(2) * independent_h
        self.assertAlmostEqual(report.entropy_generation / independent_entropy, 1.0, delta=1e-9)
        self.assertAlmostEqual(report.heat_at_temperature / (independent_entropy * 300.0), 1.0, delta=1e-9)
        self.assertAlmostEqual(report.entropy_generation / 1.137e-23, 1.0, delta=1e-3)
        self.assertAlmostEqual(report.heat_at_temperature / 3.41e-21, 1.0, delta=1e-2)

    def test_009_oracle_equivalence(self):
        rng = np.random.default_rng(9)
        for trial in range(1000):
            code, prior = random_code(rng, 6, 5)
            probabilities = prior.probabilities.tolist()
            if trial % 4 == 0:
                epsilon = float(rng.uniform(0.0, 0.5))
                channel = StochasticChannel.symmetric_flip(code.signals, epsilon)
                joint = code_model.compose_with_channel(code, prior, channel)
                expected = oracle.measures(oracle.composed_table(code.assignment, probabilities,
                                                                 channel.matrix.tolist()))
            else:
                joint = joint_distribution(code, prior)
                expected = oracle.measures(oracle.joint_table(code.assignment, probabilities, code.m))
            report = info_measures.info_report(joint)
            for key, value in expected.items():
                self.assertAlmostEqual(getattr(report, key), value, delta=1e-10, msg=key)

    def test_010_cli_reports_are_byte_identical(self):
        samples = os.path.join(PROJECT_ROOT, 'samples')
        invocations = [
            ['analyze', '--code', os.path.join(samples, 'and_gate.json')],
            ['synthesize', '--n', '4', '--m', '4', '--method', 'exhaustive'],
            ['synthesize', '--n', '6', '--m', '3', '--method', 'anneal', '--seed', '21', '--steps', '2000'],
            ['simulate', '--code', os.path.join(samples, 'balanced4.json'), '--trials', '50000', '--seed', '7'],
            ['machine', 'check', '--machine', os.path.join(samples, 'alternator_machine.json')],
            ['sweep', '--family', 'balanced', '--max-n', '16', '--csv'],
        ]
        for argv in invocations:
            outputs = []
            for _ in range(2):
                stdout, stderr = io.StringIO(), io.StringIO()
                self.assertEqual(cli.run_command(argv, stdout=stdout, stderr=stderr), 0, stderr.getvalue())
                outputs.append(stdout.getvalue())
            self.assertEqual(outputs[0], outputs[1])


if __name__ == '__main__':
    unittest.main()
