#!/usr/bin/env python3
"""
Information Measures

Entropies, mutual information, the coder/decoder symmetry residual, the Fano
error floor and Landauer bookkeeping, all in bits (log base 2) with the
convention 0 log 0 = 0.

Every function accepts the distributions built by code_model. Joint tables can
also be passed as bare 2-D arrays; they are validated on the way in.
"""
import math
import numbers
import logging
from dataclasses import dataclass, asdict
from typing import Any, Dict, Tuple, Union

import numpy as np
from scipy.optimize import bisect
from scipy.special import entr

import code_model
from code_model import DeterministicCode, JointDistribution, Prior
from error_handler import (
    FanoInfeasibleError, InvariantViolation, ValidationError, is_positive_number
)

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
BOLTZMANN_CONSTANT = 1.38e-23  # J/K
ZERO_TOLERANCE = 1e-12
AGREEMENT_TOLERANCE = 1e-10
FANO_TOLERANCE = 1e-12
COMPENSATED_SUM_THRESHOLD = 10_000

UNAMBIGUOUS = 'unambiguous'
AMBIGUOUS = 'ambiguous'


def _accumulate(values: np.ndarray) -> float:
    """Sum in index order; compensated summation for long vectors."""
    flat = np.ravel(values)
    if flat.size == 0:
        return 0.0
    if flat.size > COMPENSATED_SUM_THRESHOLD:
        return math.fsum(flat.tolist())
    return float(np.cumsum(flat)[-1])


def _entropy_bits(distribution: np.ndarray) -> float:
    return _accumulate(entr(distribution)) / LN2


def _as_joint(joint: Union[JointDistribution, Any]) -> JointDistribution:
    if isinstance(joint, JointDistribution):
        return joint
    return JointDistribution.from_array(joint)


def _conditional_rows_given_columns(table: np.ndarray) -> float:
    """H(row | column) = -sum_k q_k sum_i P(i|k) log P(i|k), zero-mass columns skipped."""
    q = table.sum(axis=0)
    mass = q > 0
    if not np.any(mass):
        return 0.0
    conditional = table[:, mass] / q[mass]
    per_column = entr(conditional).sum(axis=0)
    return _accumulate(q[mass] * per_column) / LN2


def entropy(dist) -> float:
    """Shannon entropy of a probability vector, in bits."""
    probabilities = code_model.validate_probability_vector(dist)
    return _entropy_bits(probabilities)


def joint_entropy(joint) -> float:
    """H(X_Omega, X_S)."""
    return _entropy_bits(_as_joint(joint).table)


def referent_entropy(joint) -> float:
    """H(X_Omega), from the row marginal."""
    return _entropy_bits(_as_joint(joint).row_marginal())


def signal_entropy(joint) -> float:
    """H(X_S), from the column marginal."""
    return _entropy_bits(_as_joint(joint).column_marginal())


def conditional_entropy(joint) -> float:
    """H(X_Omega | X_S): the ambiguity of the code."""
    return _conditional_rows_given_columns(_as_joint(joint).table)


def conditional_entropy_signal_given_referent(joint) -> float:
    """H(X_S | X_Omega); zero for deterministic codes."""
    return _conditional_rows_given_columns(_as_joint(joint).table.T)


def mutual_information(joint) -> float:
    """
    I(X_S; X_Omega), evaluated both as H(X_Omega) - H(X_Omega|X_S) and as
    H(X_S) - H(X_S|X_Omega). The two must agree.
    """
    joint = _as_joint(joint)
    from_referents = referent_entropy(joint) - conditional_entropy(joint)
    from_signals = signal_entropy(joint) - conditional_entropy_signal_given_referent(joint)
    if abs(from_referents - from_signals) > AGREEMENT_TOLERANCE:
        raise InvariantViolation(
            "Mutual information evaluation orders disagree",
            {'from_referents': from_referents, 'from_signals': from_signals}
        )
    return from_referents


def chain_identity_gap(joint) -> float:
    """H(X_Omega, X_S) - H(X_Omega) - H(X_S|X_Omega); zero up to rounding."""
    joint = _as_joint(joint)
    return joint_entropy(joint) - referent_entropy(joint) - conditional_entropy_signal_given_referent(joint)


def symmetry_residual(code: DeterministicCode, prior: Prior) -> float:
    """H(X_S) - H(X_Omega|X_S); zero exactly when the symmetry equation holds."""
    joint = code_model.joint_distribution(code, prior)
    return signal_entropy(joint) - conditional_entropy(joint)


def binary_entropy(p: float) -> float:
    """h(p) = -p log p - (1-p) log(1-p)."""
    if isinstance(p, bool) or not isinstance(p, numbers.Real) or not 0.0 <= p <= 1.0:
        raise ValidationError("Binary entropy needs a probability in [0, 1]", {'field': 'p', 'value': repr(p)})
    return float((entr(p) + entr(1.0 - p)) / LN2)


def fano_lower_bound(h_cond: float, n: int) -> float:
    """
    Smallest error probability compatible with Fano's inequality.

    Solves h(p) + p log2(n - 1) >= h_cond for the least p in [0, 1 - 1/n] by
    bisection. The left side increases on that interval.

    Raises:
        FanoInfeasibleError: h_cond exceeds log2 n
    """
    if isinstance(n, bool) or not isinstance(n, numbers.Integral) or n < 1:
        raise ValidationError("Fano bound needs a referent count n >= 1", {'field': 'n', 'value': repr(n)})
    if not isinstance(h_cond, numbers.Real) or h_cond != h_cond or h_cond < -ZERO_TOLERANCE:
        raise ValidationError("Conditional entropy must be non-negative", {'field': 'h_cond', 'value': repr(h_cond)})

    ceiling = math.log2(n)
    if h_cond > ceiling + ZERO_TOLERANCE:
        raise FanoInfeasibleError(
            f"Conditional entropy {h_cond!r} bits exceeds log2({n}) = {ceiling!r}",
            {'field': 'h_cond', 'h_cond': h_cond, 'n': int(n)}
        )
    target = min(max(float(h_cond), 0.0), ceiling)
    if target <= 0.0:
        return 0.0

    slope = math.log2(n - 1) if n > 2 else 0.0
    upper = 1.0 - 1.0 / n

    def gap(p: float) -> float:
        return binary_entropy(min(max(p, 0.0), 1.0)) + p * slope - target

    if gap(upper) <= FANO_TOLERANCE:
        logger.debug(f"Fano bound for h_cond={h_cond!r}, n={n} sits at the endpoint 1 - 1/n")
        return upper
    return float(bisect(gap, 0.0, upper, xtol=FANO_TOLERANCE))


@dataclass(frozen=True)
class LandauerReport:
    """Thermodynamic cost of erasing the ambiguity of a code."""
    erased_bits: float
    entropy_generation: float  # J/K
    heat_at_temperature: float  # J
    temperature: float  # K
    boltzmann_constant: float = BOLTZMANN_CONSTANT
    heat_per_bit: float = 0.0  # J, k_B T ln 2

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def landauer(h_cond: float, temperature: float) -> LandauerReport:
    """Entropy k_B ln2 H and heat k_B T ln2 H generated by erasing H bits."""
    if not is_positive_number(temperature):
        raise ValidationError("Temperature must be a positive number of kelvin",
                              {'field': 'temperature', 'value': repr(temperature)})
    if not isinstance(h_cond, numbers.Real) or h_cond != h_cond or h_cond < -ZERO_TOLERANCE:
        raise ValidationError("Erased information must be non-negative", {'field': 'h_cond', 'value': repr(h_cond)})

    bits = max(float(h_cond), 0.0)
    entropy_generation = BOLTZMANN_CONSTANT * LN2 * bits
    return LandauerReport(
        erased_bits=bits,
        entropy_generation=entropy_generation,
        heat_at_temperature=entropy_generation * temperature,
        temperature=float(temperature),
        heat_per_bit=BOLTZMANN_CONSTANT * temperature * LN2,
    )


@dataclass(frozen=True)
class InfoReport:
    h_omega: float
    h_s: float
    h_joint: float
    h_omega_given_s: float
    h_s_given_omega: float
    mutual_information: float
    symmetry_residual: float
    reversible: bool
    ambiguity_class: str

    def half_information_gaps(self) -> Tuple[float, float]:
        """|H(X_S) - H(X_Omega)/2| and |I - H(X_Omega)/2|."""
        half = self.h_omega / 2.0
        return abs(self.h_s - half), abs(self.mutual_information - half)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def classify_ambiguity(h_cond: float) -> str:
    return UNAMBIGUOUS if h_cond <= ZERO_TOLERANCE else AMBIGUOUS


def info_report(joint) -> InfoReport:
    """Bundle every quantity of the joint into one report."""
    joint = _as_joint(joint)
    h_omega = referent_entropy(joint)
    h_s = signal_entropy(joint)
    h_cond = conditional_entropy(joint)
    if h_cond < -ZERO_TOLERANCE:
        raise InvariantViolation("Conditional entropy is negative", {'h_omega_given_s': h_cond})
    ambiguity = classify_ambiguity(h_cond)
    return InfoReport(
        h_omega=h_omega,
        h_s=h_s,
        h_joint=joint_entropy(joint),
        h_omega_given_s=h_cond,
        h_s_given_omega=conditional_entropy_signal_given_referent(joint),
        mutual_information=mutual_information(joint),
        symmetry_residual=h_s - h_cond,
        reversible=ambiguity == UNAMBIGUOUS,
        ambiguity_class=ambiguity,
    )
