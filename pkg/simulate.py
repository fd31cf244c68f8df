#!/usr/bin/env python3
"""
Transmission Simulation

Builds maximum-a-posteriori decoders, computes exact and Monte Carlo decoding
error probabilities, optionally through a noisy channel, and checks the Fano
error floor against the exact error.

Randomness: trials are grouped in blocks of MC_BLOCK. Block b draws from
Generator(Philox(key=seed).jumped(b)), one row of two uniforms per trial
(referent, channel), so the outcome of a trial depends only on the seed and
the trial index, never on how blocks are spread over workers.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from types import MappingProxyType
from typing import Any, Dict, Mapping, Optional

import numpy as np

import info_measures
from code_model import (
    Alphabet, DeterministicCode, Prior, StochasticChannel,
    compose_with_channel, joint_distribution
)
from config import config
from error_handler import (
    AlignmentError, InvariantViolation, ValidationError, is_positive_int
)
from logger import get_logger, log_function_call

logger = get_logger('simulate')

NOISELESS = 'noiseless'
COMPOSED = 'composed'
FANO_SLACK = 1e-9
NO_DECISION = -1


@dataclass(frozen=True, eq=False)
class DecodeRule:
    """Received signal index -> decoded referent index, defined on the signals it covers."""
    table: Mapping[int, int]
    signals: Alphabet
    referents: Alphabet
    basis: str = NOISELESS

    def __post_init__(self):
        table = {}
        for k, i in dict(self.table).items():
            if not 0 <= int(k) < len(self.signals):
                raise ValidationError(f"Decoder entry for unknown signal index {k}", {'field': 'rule'})
            if not 0 <= int(i) < len(self.referents):
                raise ValidationError(f"Decoder maps signal {k} to unknown referent index {i}", {'field': 'rule'})
            table[int(k)] = int(i)
        object.__setattr__(self, 'table', MappingProxyType(table))

    def decode(self, signal: str) -> Optional[str]:
        i = self.table.get(self.signals.index(signal))
        return None if i is None else self.referents[i]

    def lookup(self) -> np.ndarray:
        """Dense array indexed by signal; NO_DECISION where the rule is silent."""
        dense = np.full(len(self.signals), NO_DECISION, dtype=np.int64)
        for k, i in self.table.items():
            dense[k] = i
        return dense

    def to_dict(self) -> Dict[str, Any]:
        return {
            'basis': self.basis,
            'table': {self.signals[k]: self.referents[i] for k, i in sorted(self.table.items())},
        }


@dataclass(frozen=True)
class TransmissionReport:
    trials: int
    errors: int
    empirical_error: float
    exact_map_error: float
    fano_bound: float
    conditional_entropy: float
    seed: int
    exact_error: float = 0.0
    decoder_basis: str = NOISELESS
    channel: bool = False

    def standard_error(self) -> float:
        p = self.exact_error
        return math.sqrt(p * (1.0 - p) / self.trials)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class FanoCheck:
    exact_map_error: float
    fano_bound: float
    conditional_entropy: float
    satisfies_symmetry: bool = False
    symmetry_form_bound: Optional[float] = None
    half_entropy_form_bound: Optional[float] = None
    equiprobable_floor: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _argmax_rule(table: np.ndarray, signals: Alphabet, referents: Alphabet, basis: str) -> DecodeRule:
    # np.argmax returns the first maximum: ties go to the lowest referent index
    used = np.flatnonzero(table.sum(axis=0) > 0)
    return DecodeRule({int(k): int(np.argmax(table[:, k])) for k in used}, signals, referents, basis)


def _success_probability(table: np.ndarray, rule: DecodeRule) -> float:
    return math.fsum(float(table[i, k]) for k, i in sorted(rule.table.items()))


def _require_labels(rule: DecodeRule, signals: Alphabet, what: str):
    if rule.signals.labels != signals.labels:
        raise AlignmentError(f"Decoder is defined over other signals than the {what}",
                             {'field': 'rule', 'expected': list(signals.labels), 'actual': list(rule.signals.labels)})


def map_decoder(code: DeterministicCode, prior: Prior) -> DecodeRule:
    """For each used signal, the referent maximizing P(m_i, s); lowest index wins ties."""
    joint = joint_distribution(code, prior)
    return _argmax_rule(joint.table, code.signals, code.referents, NOISELESS)


def map_decoder_through_channel(code: DeterministicCode, prior: Prior, channel: StochasticChannel) -> DecodeRule:
    """MAP rule over the joint of referent and received signal."""
    composed = compose_with_channel(code, prior, channel)
    return _argmax_rule(composed.table, channel.outputs, code.referents, COMPOSED)


def exact_error(code: DeterministicCode, prior: Prior, rule: DecodeRule) -> float:
    """
    1 - sum_s P(rule(s), s) over the used signals.

    Raises:
        ValidationError: the rule does not cover a used signal
    """
    joint = joint_distribution(code, prior)
    _require_labels(rule, code.signals, 'code')
    used = np.flatnonzero(joint.column_marginal() > 0)
    missing = [int(k) for k in used if int(k) not in rule.table]
    if missing:
        raise ValidationError(f"Decoder has no entry for used signal '{code.signals[missing[0]]}'",
                              {'field': 'rule', 'signal': code.signals[missing[0]]})
    return min(max(1.0 - _success_probability(joint.table, rule), 0.0), 1.0)


def exact_error_through_channel(code: DeterministicCode, prior: Prior, channel: StochasticChannel,
                                rule: DecodeRule) -> float:
    """Exact error of `rule` applied to received signals; received signals the rule skips count as errors."""
    composed = compose_with_channel(code, prior, channel)
    _require_labels(rule, channel.outputs, 'channel outputs')
    return min(max(1.0 - _success_probability(composed.table, rule), 0.0), 1.0)


def _cdf(probabilities: np.ndarray) -> np.ndarray:
    """Cumulative sums with the tail pinned at 1.0 from the last positive entry on."""
    cdf = np.cumsum(probabilities, axis=-1)
    positive = probabilities > 0
    if cdf.ndim == 1:
        cdf[np.flatnonzero(positive)[-1]:] = 1.0
    else:
        for row, mask in zip(cdf, positive):
            row[np.flatnonzero(mask)[-1]:] = 1.0
    return cdf


def _simulate_block(block: int, count: int, block_size: int, seed: int, referent_cdf: np.ndarray,
                    assignment: np.ndarray, channel_cdf: Optional[np.ndarray], decode: np.ndarray) -> int:
    rng = np.random.Generator(np.random.Philox(key=seed).jumped(block))
    draws = rng.random((block_size, 2))[:count]
    referents = np.searchsorted(referent_cdf, draws[:, 0], side='right')
    sent = assignment[referents]
    if channel_cdf is None:
        received = sent
    else:
        received = (channel_cdf[sent] <= draws[:, 1:2]).sum(axis=1)
    decoded = decode[received]
    return int(np.count_nonzero(decoded != referents))


@log_function_call(logger)
def monte_carlo_error(code: DeterministicCode, prior: Prior, rule: DecodeRule, trials: Optional[int] = None,
                      seed: Optional[int] = None, channel: Optional[StochasticChannel] = None,
                      workers: int = 1) -> TransmissionReport:
    """
    Sample referents from the prior, encode, optionally pass the signal through
    the channel, decode with `rule` and count mismatches.
    """
    trials = config.get_int('MC_TRIALS', 100000) if trials is None else trials
    seed = config.get_int('DEFAULT_SEED', 0) if seed is None else seed
    if not is_positive_int(trials):
        raise ValidationError("trials must be a positive integer", {'field': 'trials', 'value': repr(trials)})
    if not is_positive_int(workers):
        raise ValidationError("workers must be a positive integer", {'field': 'workers', 'value': repr(workers)})
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise ValidationError("seed must be a 64-bit unsigned integer", {'field': 'seed', 'value': repr(seed)})

    if channel is None:
        effective = joint_distribution(code, prior)
        error_of_rule = exact_error(code, prior, rule)
        channel_cdf = None
    else:
        effective = compose_with_channel(code, prior, channel)
        error_of_rule = exact_error_through_channel(code, prior, channel, rule)
        channel_cdf = _cdf(np.asarray(channel.matrix))
    exact_map = 1.0 - math.fsum(float(v) for v in effective.table.max(axis=0))
    h_cond = info_measures.conditional_entropy(effective)
    bound = info_measures.fano_lower_bound(h_cond, code.n)

    block_size = max(1, config.get_int('MC_BLOCK', 4096))
    blocks = [(b, min(block_size, trials - b * block_size)) for b in range(-(-trials // block_size))]
    referent_cdf = _cdf(np.asarray(prior.probabilities))
    assignment = np.asarray(code.assignment_array())
    decode = rule.lookup()

    def simulate(block):
        return _simulate_block(block[0], block[1], block_size, seed, referent_cdf, assignment, channel_cdf, decode)

    with logger.timer(f"{trials} transmission trials"):
        if workers > 1 and len(blocks) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                errors = sum(pool.map(simulate, blocks))
        else:
            errors = sum(simulate(block) for block in blocks)

    report = TransmissionReport(
        trials=trials,
        errors=errors,
        empirical_error=errors / trials,
        exact_map_error=max(exact_map, 0.0),
        fano_bound=bound,
        conditional_entropy=h_cond,
        seed=seed,
        exact_error=error_of_rule,
        decoder_basis=rule.basis,
        channel=channel is not None,
    )
    if report.exact_map_error < report.fano_bound - FANO_SLACK:
        raise InvariantViolation("Exact MAP error falls below the Fano bound", report.to_dict())
    logger.info(f"Transmission: {errors} errors in {trials} trials (exact {error_of_rule:.6f})")
    return report


def fano_check(code: DeterministicCode, prior: Prior) -> FanoCheck:
    """
    Exact MAP error against the Fano lower bound for H(X_Omega|X_S).

    For codes satisfying the symmetry equation the bound can be rewritten with
    H(X_S), then with H(X_Omega)/2, in place of the ambiguity; both rewritten
    forms are evaluated at the exact error (they need n > 2).
    """
    joint = joint_distribution(code, prior)
    h_cond = info_measures.conditional_entropy(joint)
    h_s = info_measures.signal_entropy(joint)
    h_omega = info_measures.referent_entropy(joint)
    n = code.n

    p_e = exact_error(code, prior, map_decoder(code, prior))
    bound = info_measures.fano_lower_bound(h_cond, n)
    if p_e < bound - FANO_SLACK:
        raise InvariantViolation("Exact MAP error falls below the Fano bound",
                                 {'exact_map_error': p_e, 'fano_bound': bound, 'n': n})

    tolerance = config.get_float('SYNTHESIS_TOLERANCE', 1e-9)
    symmetric = abs(h_s - h_cond) <= tolerance
    symmetry_form = half_form = None
    if symmetric and n > 2:
        h_pe = info_measures.binary_entropy(p_e)
        log_rest = math.log2(n - 1)
        symmetry_form = (h_s - h_pe) / log_rest
        half_form = (h_omega - 2.0 * h_pe) / (2.0 * log_rest)
        if max(symmetry_form, half_form) > p_e + FANO_SLACK:
            raise InvariantViolation("Rewritten Fano bound exceeds the exact error",
                                     {'exact_map_error': p_e, 'symmetry_form_bound': symmetry_form,
                                      'half_entropy_form_bound': half_form})

    return FanoCheck(
        exact_map_error=p_e,
        fano_bound=bound,
        conditional_entropy=h_cond,
        satisfies_symmetry=symmetric,
        symmetry_form_bound=symmetry_form,
        half_entropy_form_bound=half_form,
        equiprobable_floor=(p_e >= 0.5 - info_measures.ZERO_TOLERANCE) if prior.is_uniform() else None,
    )
