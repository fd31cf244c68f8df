#!/usr/bin/env python3
"""
Code Synthesis

Produces the two extreme codes (one signal per referent, a single signal for
everything), the balanced-partition family, and searches the space of
deterministic codes for those satisfying the symmetry equation
H(X_S) = H(X_Omega|X_S).

Search objective is |H(X_S) - H(X_Omega|X_S)| in bits. Two methods:
- exhaustive: every assignment vector, scanned in lexicographic blocks
- anneal: simulated annealing over assignment vectors, seeded and reproducible
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.special import entr

import info_measures
from code_model import (
    DeterministicCode, Prior, default_referents, default_signals
)
from config import config
from error_handler import (
    AlignmentError, SearchSpaceError, ValidationError, is_positive_int, validate_inputs
)
from logger import get_logger, log_function_call

logger = get_logger('synthesis')

LN2 = info_measures.LN2
# Slack between the vectorized screening objective and the exact recomputation
SCREEN_SLACK = 1e-9


class CodeExtreme(str, Enum):
    ONE_TO_ONE = 'one_to_one'
    ALL_TO_ONE = 'all_to_one'


class SynthesisMethod(str, Enum):
    EXHAUSTIVE = 'exhaustive'
    ANNEAL = 'anneal'


@dataclass(frozen=True)
class SynthesisConfig:
    """Search parameters. `prior=None` stands for the uniform prior."""
    n: int
    m: int
    prior: Optional[Prior] = None
    method: SynthesisMethod = SynthesisMethod.EXHAUSTIVE
    tolerance: float = field(default_factory=lambda: config.get_float('SYNTHESIS_TOLERANCE', 1e-9))
    seed: int = field(default_factory=lambda: config.get_int('DEFAULT_SEED', 0))
    anneal_steps: int = field(default_factory=lambda: config.get_int('ANNEAL_STEPS', 100000))
    initial_temperature: float = field(default_factory=lambda: config.get_float('ANNEAL_INITIAL_TEMPERATURE', 1.0))
    cooling_rate: float = field(default_factory=lambda: config.get_float('ANNEAL_COOLING_RATE', 0.999))
    workers: int = field(default_factory=lambda: config.get_int('ENUMERATION_WORKERS', 1))

    def __post_init__(self):
        try:
            object.__setattr__(self, 'method', SynthesisMethod(self.method))
        except ValueError:
            raise ValidationError(f"Unknown synthesis method '{self.method}'", {'field': 'method'}) from None
        for name in ('n', 'm', 'anneal_steps', 'workers'):
            if not is_positive_int(getattr(self, name)):
                raise ValidationError(f"{name} must be a positive integer", {'field': name})
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must be a 64-bit unsigned integer", {'field': 'seed'})
        if not self.tolerance >= 0:
            raise ValidationError("tolerance must be non-negative", {'field': 'tolerance'})
        if not 0 < self.cooling_rate < 1:
            raise ValidationError("cooling_rate must lie strictly between 0 and 1", {'field': 'cooling_rate'})
        if not self.initial_temperature > 0:
            raise ValidationError("initial_temperature must be positive", {'field': 'initial_temperature'})
        if self.prior is not None and len(self.prior) != self.n:
            raise AlignmentError(f"Prior has {len(self.prior)} entries for n = {self.n}",
                                 {'field': 'prior', 'expected': self.n, 'actual': len(self.prior)})

    def resolved_prior(self) -> Prior:
        return self.prior if self.prior is not None else Prior.uniform(self.n)


@dataclass(frozen=True)
class SynthesisResult:
    codes: Tuple[DeterministicCode, ...]
    residuals: Tuple[float, ...]
    explored: int
    method: SynthesisMethod
    within_tolerance: int = 0
    truncated: bool = False

    def __post_init__(self):
        if len(self.codes) != len(self.residuals):
            raise ValidationError("codes and residuals must align", {'field': 'residuals'})
        if any(b < a for a, b in zip(self.residuals, self.residuals[1:])):
            raise ValidationError("residuals must be sorted nondecreasing", {'field': 'residuals'})

    @property
    def best(self) -> Optional[DeterministicCode]:
        return self.codes[0] if self.codes else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'method': self.method.value,
            'explored': self.explored,
            'within_tolerance': self.within_tolerance,
            'truncated': self.truncated,
            'codes': [
                {'map': list(code.assignment), 'residual': residual}
                for code, residual in zip(self.codes, self.residuals)
            ],
        }


def code_residual(code: DeterministicCode, prior: Prior) -> float:
    """|H(X_S) - H(X_Omega|X_S)|, the quantity every synthesis result reports."""
    return abs(info_measures.symmetry_residual(code, prior))


@validate_inputs(n=is_positive_int)
def extreme_code(kind, n: int) -> DeterministicCode:
    """One signal per referent, or one signal for all referents."""
    try:
        kind = CodeExtreme(kind)
    except ValueError:
        raise ValidationError(f"Unknown extreme '{kind}'", {'field': 'kind'}) from None
    referents = default_referents(n)
    if kind is CodeExtreme.ONE_TO_ONE:
        return DeterministicCode(referents, default_signals(n), tuple(range(n)))
    return DeterministicCode(referents, default_signals(1), (0,) * n)


@validate_inputs(n=is_positive_int)
def balanced_partition_code(n: int) -> DeterministicCode:
    """sqrt(n) signals, each covering a consecutive block of sqrt(n) referents."""
    c = math.isqrt(n)
    if c * c != n:
        raise ValidationError(f"n = {n} is not a perfect square", {'field': 'n', 'value': n})
    return DeterministicCode(default_referents(n), default_signals(c), tuple(i // c for i in range(n)))


def _decode_index(index: int, n: int, m: int) -> Tuple[int, ...]:
    digits = []
    for _ in range(n):
        index, digit = divmod(index, m)
        digits.append(digit)
    return tuple(reversed(digits))


def _scan_block(start: int, stop: int, n: int, m: int, probabilities: np.ndarray,
                h_omega: float, tolerance: float) -> Tuple[np.ndarray, np.ndarray, float, np.ndarray, np.ndarray]:
    """
    Screen assignment vectors start..stop-1 (lexicographic, first referent most
    significant) with the deterministic identity residual = 2 H(X_S) - H(X_Omega).

    Returns candidate indices within tolerance with their screening values, the
    block minimum, and the indices/values tying that minimum.
    """
    indices = np.arange(start, stop, dtype=np.int64)
    powers = m ** np.arange(n - 1, -1, -1, dtype=np.int64)
    digits = (indices[:, None] // powers[None, :]) % m

    rows = np.arange(indices.size)
    q = np.zeros((indices.size, m))
    for i in range(n):
        q[rows, digits[:, i]] += probabilities[i]
    screened = np.abs(2.0 * entr(q).sum(axis=1) / LN2 - h_omega)

    within = screened <= tolerance + SCREEN_SLACK
    block_min = float(screened.min())
    ties = screened <= block_min + SCREEN_SLACK
    return indices[within], screened[within], block_min, indices[ties], screened[ties]


def _keep_smallest(indices: np.ndarray, values: np.ndarray, limit: int) -> Tuple[np.ndarray, bool]:
    order = np.lexsort((indices, values))
    if order.size > limit:
        return indices[order[:limit]], True
    return indices[order], False


@log_function_call(logger)
def enumerate_codes(synthesis_config: SynthesisConfig) -> SynthesisResult:
    """
    Examine all m**n assignment vectors and return every code whose residual is
    within tolerance; when there is none, return the codes attaining the global
    minimum instead.

    Raises:
        SearchSpaceError: m**n exceeds EXHAUSTIVE_LIMIT; use the anneal method
    """
    cfg = synthesis_config
    if cfg.method is not SynthesisMethod.EXHAUSTIVE:
        raise ValidationError("enumerate_codes needs method=exhaustive", {'field': 'method'})
    n, m = cfg.n, cfg.m
    total = m ** n
    limit = config.get_int('EXHAUSTIVE_LIMIT', 100_000_000)
    if total > limit:
        raise SearchSpaceError(
            f"Exhaustive search over {m}^{n} = {total} codes exceeds the limit of {limit}; use method=anneal",
            {'field': 'method', 'search_space': total, 'limit': limit}
        )

    prior = cfg.resolved_prior()
    probabilities = np.asarray(prior.probabilities)
    h_omega = info_measures.entropy(probabilities)
    block = max(1, config.get_int('ENUMERATION_BLOCK', 65536))
    bounds = [(start, min(start + block, total)) for start in range(0, total, block)]

    def scan(bound):
        return _scan_block(bound[0], bound[1], n, m, probabilities, h_omega, cfg.tolerance)

    with logger.timer(f"exhaustive scan of {total} codes"):
        if cfg.workers > 1 and len(bounds) > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                scanned = list(pool.map(scan, bounds))
        else:
            scanned = [scan(bound) for bound in bounds]

    candidates = np.concatenate([s[0] for s in scanned])
    candidate_values = np.concatenate([s[1] for s in scanned])
    global_min = min(s[2] for s in scanned)
    if candidates.size == 0:
        tie_indices = np.concatenate([s[3] for s in scanned])
        tie_values = np.concatenate([s[4] for s in scanned])
        keep = tie_values <= global_min + SCREEN_SLACK
        candidates, candidate_values = tie_indices[keep], tie_values[keep]

    max_reported = max(1, config.get_int('MAX_REPORTED_CODES', 100000))
    kept, truncated = _keep_smallest(candidates, candidate_values, max_reported)
    if truncated:
        logger.warning(f"Reporting the {max_reported} best of {candidates.size} candidate codes")

    referents, signals = default_referents(n), default_signals(m)
    scored = []
    for index in kept.tolist():
        code = DeterministicCode(referents, signals, _decode_index(index, n, m))
        scored.append((code_residual(code, prior), index, code))

    within = [entry for entry in scored if entry[0] <= cfg.tolerance]
    if within:
        selected = within
    else:
        best = min(entry[0] for entry in scored)
        selected = [entry for entry in scored if entry[0] <= best + info_measures.ZERO_TOLERANCE]
    selected.sort(key=lambda entry: (entry[0], entry[1]))

    logger.info(f"Exhaustive search: {len(within)} of {total} codes within tolerance {cfg.tolerance}")
    return SynthesisResult(
        codes=tuple(entry[2] for entry in selected),
        residuals=tuple(entry[0] for entry in selected),
        explored=total,
        method=cfg.method,
        within_tolerance=len(within),
        truncated=truncated,
    )


def _screen(q: np.ndarray, h_omega: float) -> float:
    return abs(2.0 * float(entr(q).sum()) / LN2 - h_omega)


@log_function_call(logger)
def anneal_code(synthesis_config: SynthesisConfig) -> SynthesisResult:
    """
    Simulated annealing over assignment vectors.

    Move: reassign one uniformly chosen referent to a uniformly chosen signal.
    Temperature t: initial_temperature * cooling_rate**t. Metropolis acceptance.
    The chain stops early once the best residual is within tolerance.
    """
    cfg = synthesis_config
    if cfg.method is not SynthesisMethod.ANNEAL:
        raise ValidationError("anneal_code needs method=anneal", {'field': 'method'})
    n, m = cfg.n, cfg.m
    prior = cfg.resolved_prior()
    probabilities = np.asarray(prior.probabilities)
    h_omega = info_measures.entropy(probabilities)

    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    current = rng.integers(0, m, size=n)
    referent_moves = rng.integers(0, n, size=cfg.anneal_steps)
    signal_moves = rng.integers(0, m, size=cfg.anneal_steps)
    thresholds = rng.random(cfg.anneal_steps)

    current_obj = _screen(np.bincount(current, weights=probabilities, minlength=m), h_omega)
    best, best_obj = current.copy(), current_obj
    explored = 1
    temperature = cfg.initial_temperature

    with logger.timer(f"annealing n={n} m={m} seed={cfg.seed}"):
        for step in range(cfg.anneal_steps):
            if best_obj <= cfg.tolerance:
                break
            proposal = current.copy()
            proposal[referent_moves[step]] = signal_moves[step]
            proposal_obj = _screen(np.bincount(proposal, weights=probabilities, minlength=m), h_omega)
            explored += 1

            delta = proposal_obj - current_obj
            if delta <= 0 or (temperature > 0 and thresholds[step] < math.exp(-delta / temperature)):
                current, current_obj = proposal, proposal_obj
                if current_obj < best_obj:
                    best, best_obj = current.copy(), current_obj
            temperature *= cfg.cooling_rate

    code = DeterministicCode(default_referents(n), default_signals(m), tuple(int(k) for k in best))
    residual = code_residual(code, prior)
    logger.info(f"Annealing explored {explored} codes, best residual {residual:.3e}")
    return SynthesisResult(
        codes=(code,),
        residuals=(residual,),
        explored=explored,
        method=cfg.method,
        within_tolerance=int(residual <= cfg.tolerance),
    )


def synthesize(synthesis_config: SynthesisConfig) -> SynthesisResult:
    """Dispatch on the configured method."""
    if synthesis_config.method is SynthesisMethod.EXHAUSTIVE:
        return enumerate_codes(synthesis_config)
    return anneal_code(synthesis_config)
