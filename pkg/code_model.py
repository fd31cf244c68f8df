#!/usr/bin/env python3
"""
Code Model

This module represents referent and signal alphabets, priors over referents,
deterministic codes, stochastic channels and the joint/posterior distributions
every other module consumes.

A deterministic code is stored as an assignment vector (one signal index per
referent). The dense 0/1 matrix delta_ij is derived from it on request, so a
code with a row holding zero or two ones cannot be constructed.

All values are immutable after construction; numpy arrays are flagged
read-only.
"""
import math
import numbers
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from error_handler import (
    AlignmentError, DistributionError, UnknownSymbolError, ValidationError, is_within_range, validate_inputs
)

logger = logging.getLogger(__name__)

PROBABILITY_TOLERANCE = 1e-12
DERIVED_TOLERANCE = 1e-10
COMPOSITE_DELIMITER = '#'


def _read_only(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Alphabet:
    """Ordered, nonempty collection of distinct text labels."""
    labels: Tuple[str, ...]
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(str(label) for label in self.labels)
        if not labels:
            raise ValidationError("Alphabet must contain at least one label", {'field': 'labels'})
        duplicates = sorted(label for label, count in Counter(labels).items() if count > 1)
        if duplicates:
            raise ValidationError(
                f"Alphabet labels must be distinct, duplicated: {', '.join(duplicates)}",
                {'field': 'labels', 'duplicates': duplicates}
            )
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, '_index', {label: i for i, label in enumerate(labels)})

    @classmethod
    def numbered(cls, prefix: str, count: int) -> 'Alphabet':
        """Alphabet of `count` labels prefix0, prefix1, ..."""
        return cls(tuple(f"{prefix}{i}" for i in range(count)))

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownSymbolError(f"Unknown label '{label}'", {'label': label}) from None

    def isdisjoint(self, other: 'Alphabet') -> bool:
        return not set(self.labels) & set(other.labels)

    def __contains__(self, label) -> bool:
        return label in self._index

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __getitem__(self, i: int) -> str:
        return self.labels[i]


def default_referents(n: int) -> Alphabet:
    return Alphabet.numbered('m', n)


def default_signals(m: int) -> Alphabet:
    return Alphabet.numbered('s', m)


def validate_probability_vector(values, field_name: str = 'distribution',
                                tolerance: float = PROBABILITY_TOLERANCE) -> np.ndarray:
    """
    Check that `values` is a probability vector and return it as a read-only array.

    Raises:
        DistributionError: when an entry is negative or not finite, or the
            entries do not sum to 1 within `tolerance`
    """
    try:
        array = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as e:
        raise DistributionError(f"{field_name} is not numeric", {'field': field_name}, e)
    if array.ndim != 1 or array.size == 0:
        raise DistributionError(f"{field_name} must be a nonempty vector", {'field': field_name})
    if not np.all(np.isfinite(array)):
        raise DistributionError(f"{field_name} has non-finite entries", {'field': field_name})
    negative = np.flatnonzero(array < 0)
    if negative.size:
        raise DistributionError(
            f"{field_name} has a negative entry at index {int(negative[0])}",
            {'field': f"{field_name}[{int(negative[0])}]"}
        )
    total = math.fsum(array.tolist())
    if abs(total - 1.0) > tolerance:
        raise DistributionError(
            f"{field_name} sums to {total!r}, expected 1",
            {'field': field_name, 'sum': total}
        )
    return _read_only(array)


@dataclass(frozen=True, eq=False)
class Prior:
    """Probability vector over a referent alphabet."""
    probabilities: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'probabilities',
                           validate_probability_vector(self.probabilities, 'prior'))

    @classmethod
    def uniform(cls, n: int) -> 'Prior':
        if not isinstance(n, numbers.Integral) or n < 1:
            raise ValidationError("Uniform prior needs n >= 1", {'field': 'n', 'value': repr(n)})
        return cls(np.full(int(n), 1.0 / n))

    @property
    def support(self) -> np.ndarray:
        return self.probabilities > 0

    def is_uniform(self, tolerance: float = PROBABILITY_TOLERANCE) -> bool:
        n = len(self)
        return bool(np.all(np.abs(self.probabilities - 1.0 / n) <= tolerance))

    def permuted(self, order: Sequence[int]) -> 'Prior':
        """Prior re-indexed so that new referent j is old referent order[j]."""
        return Prior(self.probabilities[list(order)])

    def __len__(self) -> int:
        return int(self.probabilities.size)

    def __repr__(self) -> str:
        return f"Prior({self.probabilities.tolist()!r})"


@dataclass(frozen=True)
class DeterministicCode:
    """
    Total assignment of each referent to exactly one signal.

    `assignment[i]` is the index of the signal referent i is coded into.
    """
    referents: Alphabet
    signals: Alphabet
    assignment: Tuple[int, ...]

    def __post_init__(self):
        raw = tuple(self.assignment)
        if len(raw) != len(self.referents):
            raise ValidationError(
                f"Assignment has {len(raw)} entries for {len(self.referents)} referents",
                {'field': 'map', 'expected': len(self.referents), 'actual': len(raw)}
            )
        assignment = []
        for i, value in enumerate(raw):
            if isinstance(value, bool) or not isinstance(value, numbers.Integral):
                raise ValidationError(f"Assignment entry {i} is not an integer",
                                      {'field': f"map[{i}]", 'value': repr(value)})
            if not 0 <= value < len(self.signals):
                raise ValidationError(
                    f"Assignment entry {i} = {value} is not a signal index (0..{len(self.signals) - 1})",
                    {'field': f"map[{i}]", 'value': int(value)}
                )
            assignment.append(int(value))
        object.__setattr__(self, 'assignment', tuple(assignment))

    @classmethod
    def from_mapping(cls, referents: Alphabet, signals: Alphabet, mapping: Mapping[str, str]) -> 'DeterministicCode':
        """Build a code from a referent label -> signal label mapping."""
        missing = [label for label in referents if label not in mapping]
        if missing:
            raise ValidationError(f"No signal assigned to referent '{missing[0]}'",
                                  {'field': 'map', 'referent': missing[0]})
        return cls(referents, signals, tuple(signals.index(mapping[label]) for label in referents))

    @property
    def n(self) -> int:
        return len(self.referents)

    @property
    def m(self) -> int:
        return len(self.signals)

    def assignment_array(self) -> np.ndarray:
        return _read_only(self.assignment, dtype=np.int64)

    def matrix(self) -> np.ndarray:
        """Dense delta_ij matrix: delta[i, j] = 1 iff referent i is coded as signal j."""
        dense = np.zeros((self.n, self.m))
        dense[np.arange(self.n), self.assignment] = 1.0
        dense.setflags(write=False)
        return dense

    def signal_of(self, referent: str) -> str:
        return self.signals[self.assignment[self.referents.index(referent)]]

    def preimage(self, signal_index: int) -> Tuple[int, ...]:
        return tuple(i for i, k in enumerate(self.assignment) if k == signal_index)

    def used_signals(self) -> Tuple[int, ...]:
        return tuple(sorted(set(self.assignment)))

    def is_injective(self) -> bool:
        return len(set(self.assignment)) == self.n

    def relabeled(self, order: Sequence[int]) -> 'DeterministicCode':
        """Code whose referent j is this code's referent order[j]."""
        return DeterministicCode(
            Alphabet(tuple(self.referents[i] for i in order)),
            self.signals,
            tuple(self.assignment[i] for i in order)
        )

    def describe(self) -> str:
        pairs = ', '.join(f"{r}->{self.signals[k]}" for r, k in zip(self.referents, self.assignment))
        return f"{{{pairs}}}"


@dataclass(frozen=True, eq=False)
class StochasticChannel:
    """Row-stochastic matrix N[k, k'] = P(received k' | sent k)."""
    matrix: np.ndarray
    outputs: Optional[Alphabet] = None

    def __post_init__(self):
        try:
            matrix = np.asarray(self.matrix, dtype=float)
        except (TypeError, ValueError) as e:
            raise DistributionError("Channel matrix is not numeric", {'field': 'matrix'}, e)
        if matrix.ndim != 2 or matrix.size == 0:
            raise DistributionError("Channel matrix must be a nonempty 2-D table", {'field': 'matrix'})
        if not np.all(np.isfinite(matrix)):
            raise DistributionError("Channel matrix has non-finite entries", {'field': 'matrix'})
        for k, row in enumerate(matrix):
            if np.any(row < 0):
                raise DistributionError(f"Channel row {k} has a negative entry", {'field': f"matrix[{k}]"})
            total = math.fsum(row.tolist())
            if abs(total - 1.0) > PROBABILITY_TOLERANCE:
                raise DistributionError(f"Channel row {k} sums to {total!r}, expected 1",
                                        {'field': f"matrix[{k}]", 'sum': total})
        outputs = self.outputs if self.outputs is not None else Alphabet.numbered('r', matrix.shape[1])
        if len(outputs) != matrix.shape[1]:
            raise AlignmentError(
                f"Channel has {matrix.shape[1]} output columns but {len(outputs)} output labels",
                {'field': 'outputs'}
            )
        object.__setattr__(self, 'matrix', _read_only(matrix))
        object.__setattr__(self, 'outputs', outputs)

    @classmethod
    def identity(cls, signals: Alphabet) -> 'StochasticChannel':
        return cls(np.eye(len(signals)), signals)

    @classmethod
    @validate_inputs(epsilon=is_within_range(0.0, 1.0))
    def symmetric_flip(cls, signals: Alphabet, epsilon: float) -> 'StochasticChannel':
        """Keep the signal with probability 1 - epsilon, else move to one of the others uniformly."""
        m = len(signals)
        if m == 1:
            return cls.identity(signals)
        matrix = np.full((m, m), epsilon / (m - 1))
        np.fill_diagonal(matrix, 1.0 - epsilon)
        return cls(matrix, signals)

    @classmethod
    def fully_mixing(cls, inputs: int, outputs: Alphabet) -> 'StochasticChannel':
        return cls(np.full((inputs, len(outputs)), 1.0 / len(outputs)), outputs)

    @property
    def n_inputs(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def n_outputs(self) -> int:
        return int(self.matrix.shape[1])


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Table P(m_i, s_k); rows are referents, columns are signals."""
    table: np.ndarray
    row_labels: Alphabet
    col_labels: Alphabet

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        if table.ndim != 2:
            raise DistributionError("Joint table must be 2-D", {'field': 'table'})
        if table.shape != (len(self.row_labels), len(self.col_labels)):
            raise AlignmentError(
                f"Joint table shape {table.shape} does not match labels "
                f"({len(self.row_labels)}, {len(self.col_labels)})",
                {'field': 'table'}
            )
        if not np.all(np.isfinite(table)) or np.any(table < 0):
            raise DistributionError("Joint table entries must be finite and non-negative", {'field': 'table'})
        total = math.fsum(table.ravel().tolist())
        if abs(total - 1.0) > DERIVED_TOLERANCE:
            raise DistributionError(f"Joint table sums to {total!r}, expected 1",
                                    {'field': 'table', 'sum': total})
        object.__setattr__(self, 'table', _read_only(table))

    @classmethod
    def from_array(cls, table) -> 'JointDistribution':
        """Wrap a bare array, labelling rows m0.. and columns s0.."""
        table = np.asarray(table, dtype=float)
        if table.ndim != 2:
            raise DistributionError("Joint table must be 2-D", {'field': 'table'})
        return cls(table, default_referents(table.shape[0]), default_signals(table.shape[1]))

    def row_marginal(self) -> np.ndarray:
        return _read_only(self.table.sum(axis=1))

    def column_marginal(self) -> np.ndarray:
        return _read_only(self.table.sum(axis=0))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.table.shape


@dataclass(frozen=True, eq=False)
class Posterior:
    """
    P(m_i | s_k) for every signal.

    Columns of signals with q(s_k) = 0 are undefined: `defined[k]` is False and
    the column holds NaN.
    """
    matrix: np.ndarray
    defined: np.ndarray
    referents: Alphabet
    signals: Alphabet

    def column(self, signal: str) -> Optional[np.ndarray]:
        k = self.signals.index(signal)
        if not self.defined[k]:
            return None
        return self.matrix[:, k]


def _check_alignment(code: DeterministicCode, prior: Prior):
    if len(prior) != code.n:
        raise AlignmentError(
            f"Prior has {len(prior)} entries but the code has {code.n} referents",
            {'field': 'prior', 'expected': code.n, 'actual': len(prior)}
        )


def induced_signal_distribution(code: DeterministicCode, prior: Prior) -> np.ndarray:
    """q(s_i) = sum_k p(m_k) delta_ki; unused signals get 0."""
    _check_alignment(code, prior)
    q = np.bincount(code.assignment_array(), weights=prior.probabilities, minlength=code.m)
    return _read_only(q)


def joint_distribution(code: DeterministicCode, prior: Prior) -> JointDistribution:
    """P(m_i, s_k) = p(m_i) delta_ik."""
    _check_alignment(code, prior)
    table = np.zeros((code.n, code.m))
    table[np.arange(code.n), code.assignment] = prior.probabilities
    return JointDistribution(table, code.referents, code.signals)


def posterior(code: DeterministicCode, prior: Prior) -> Posterior:
    """Bayes inversion of the code; zero-mass signal columns are flagged undefined."""
    joint = joint_distribution(code, prior)
    q = joint.column_marginal()
    defined = q > 0
    matrix = np.full(joint.shape, np.nan)
    np.divide(joint.table, q, out=matrix, where=np.broadcast_to(defined, joint.shape))
    return Posterior(_read_only(matrix), _read_only(defined, dtype=bool), code.referents, code.signals)


def is_logically_reversible(code: DeterministicCode, prior: Prior) -> bool:
    """True iff the code is injective on the support of the prior."""
    _check_alignment(code, prior)
    used = [k for k, p in zip(code.assignment, prior.probabilities) if p > 0]
    return len(set(used)) == len(used)


def compose_with_channel(code: DeterministicCode, prior: Prior, channel: StochasticChannel) -> JointDistribution:
    """Joint of referent and received signal for the cascade code + channel."""
    if channel.n_inputs != code.m:
        raise AlignmentError(
            f"Channel has {channel.n_inputs} input rows but the code has {code.m} signals",
            {'field': 'matrix', 'expected': code.m, 'actual': channel.n_inputs}
        )
    joint = joint_distribution(code, prior)
    return JointDistribution(joint.table @ channel.matrix, code.referents, channel.outputs)


def reversibilize(code: DeterministicCode) -> DeterministicCode:
    """
    Make the code injective by tagging each signal with the referent's position
    inside its preimage class (ordered by referent order). Composite labels read
    'signal#tag'.
    """
    seen: Counter = Counter()
    pairs: List[Tuple[int, int]] = []
    for k in code.assignment:
        pairs.append((k, seen[k]))
        seen[k] += 1

    composite = sorted(set(pairs))
    position = {pair: j for j, pair in enumerate(composite)}
    signals = Alphabet(tuple(f"{code.signals[k]}{COMPOSITE_DELIMITER}{tag}" for k, tag in composite))
    logger.debug(f"Tagged {code.n} referents onto {len(signals)} composite signals")
    return DeterministicCode(code.referents, signals, tuple(position[pair] for pair in pairs))


def strip_tags(code: DeterministicCode, signals: Alphabet) -> DeterministicCode:
    """Project composite 'signal#tag' labels back onto `signals`."""
    assignment = []
    for k in code.assignment:
        label = code.signals[k]
        base, delimiter, _ = label.rpartition(COMPOSITE_DELIMITER)
        if not delimiter:
            raise ValidationError(f"Signal '{label}' carries no tag", {'field': 'signals', 'label': label})
        assignment.append(signals.index(base))
    return DeterministicCode(code.referents, signals, tuple(assignment))
