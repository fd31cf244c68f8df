#!/usr/bin/env python3
"""
Coding Machine

A deterministic Turing machine restricted to coding: each step reads one
referent, writes one signal, changes state and moves the head right. The tape
is the input sequence itself; blanks and the start marker are never revisited
so they are not stored. The machine halts when the input is exhausted.

Transition table: (state, referent) -> (next state, signal).
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Dict, List, Mapping, Sequence, Tuple

from code_model import Alphabet, COMPOSITE_DELIMITER, DeterministicCode
from error_handler import (
    InfeasibleError, InvariantViolation, ProjectionUndefinedError,
    UnknownSymbolError, ValidationError
)

logger = logging.getLogger(__name__)

MOVE_RIGHT = 'R'

Transition = Tuple[str, str]


@dataclass(frozen=True, eq=False)
class CodingMachine:
    states: Alphabet
    input_alphabet: Alphabet
    output_alphabet: Alphabet
    initial_state: str
    transitions: Mapping[Tuple[str, str], Transition]
    move: str = field(default=MOVE_RIGHT, init=False)

    def __post_init__(self):
        for name, left, right in (('states', self.states, self.input_alphabet),
                                  ('states', self.states, self.output_alphabet),
                                  ('output_alphabet', self.input_alphabet, self.output_alphabet)):
            if not left.isdisjoint(right):
                shared = sorted(set(left.labels) & set(right.labels))
                raise ValidationError(
                    f"Alphabets must be disjoint, shared labels: {', '.join(shared)}",
                    {'field': name, 'shared': shared}
                )
        if self.initial_state not in self.states:
            raise ValidationError(f"Initial state '{self.initial_state}' is not a state",
                                  {'field': 'initial_state'})

        table: Dict[Tuple[str, str], Transition] = {}
        for (state, referent), (next_state, signal) in dict(self.transitions).items():
            if state not in self.states or referent not in self.input_alphabet:
                raise ValidationError(f"Transition from unknown pair ({state}, {referent})",
                                      {'field': 'transitions', 'pair': [state, referent]})
            if next_state not in self.states:
                raise ValidationError(f"Transition to unknown state '{next_state}'",
                                      {'field': 'transitions', 'pair': [state, referent]})
            if signal not in self.output_alphabet:
                raise ValidationError(f"Transition writes unknown signal '{signal}'",
                                      {'field': 'transitions', 'pair': [state, referent]})
            table[(state, referent)] = (next_state, signal)

        missing = [(q, r) for q in self.states for r in self.input_alphabet if (q, r) not in table]
        if missing:
            q, r = missing[0]
            raise ValidationError(f"Transition table is not total: no entry for ({q}, {r})",
                                  {'field': 'transitions', 'missing': [q, r]})
        object.__setattr__(self, 'transitions', MappingProxyType(table))

    def step(self, state: str, referent: str) -> Transition:
        return self.transitions[(state, referent)]


@dataclass(frozen=True)
class RunStep:
    state_before: str
    referent: str
    signal: str
    state_after: str


@dataclass(frozen=True)
class RunTrace:
    initial_state: str
    steps: Tuple[RunStep, ...]
    output: Tuple[str, ...]

    @property
    def final_state(self) -> str:
        return self.steps[-1].state_after if self.steps else self.initial_state

    def to_dict(self) -> Dict:
        return {
            'initial_state': self.initial_state,
            'final_state': self.final_state,
            'steps': [[s.state_before, s.referent, s.signal, s.state_after] for s in self.steps],
            'output': list(self.output),
        }


def run(machine: CodingMachine, input: Sequence[str]) -> RunTrace:
    """Sweep the input left to right from the initial state."""
    state = machine.initial_state
    steps: List[RunStep] = []
    for position, referent in enumerate(input):
        if referent not in machine.input_alphabet:
            raise UnknownSymbolError(
                f"Input symbol '{referent}' at position {position} is not in the input alphabet",
                {'field': 'input', 'position': position, 'label': referent}
            )
        next_state, signal = machine.step(state, referent)
        steps.append(RunStep(state, referent, signal, next_state))
        state = next_state
    return RunTrace(machine.initial_state, tuple(steps), tuple(step.signal for step in steps))


def is_reversible_machine(machine: CodingMachine) -> bool:
    """True iff (state, referent) -> (next state, signal) is injective."""
    images = list(machine.transitions.values())
    return len(set(images)) == len(images)


def collisions(machine: CodingMachine) -> List[List[Tuple[str, str]]]:
    """Groups of (state, referent) pairs sharing the same image, in table order."""
    groups: Dict[Transition, List[Tuple[str, str]]] = {}
    for q in machine.states:
        for r in machine.input_alphabet:
            groups.setdefault(machine.transitions[(q, r)], []).append((q, r))
    return [pairs for pairs in groups.values() if len(pairs) > 1]


def project_to_code(machine: CodingMachine) -> DeterministicCode:
    """
    Stateless code of a machine whose written signal does not depend on the state.

    Raises:
        ProjectionUndefinedError: some referent is written differently in two states
    """
    assignment = []
    for referent in machine.input_alphabet:
        written = sorted({machine.transitions[(q, referent)][1] for q in machine.states})
        if len(written) > 1:
            raise ProjectionUndefinedError(
                f"Referent '{referent}' is written as {', '.join(written)} depending on the state",
                {'field': 'transitions', 'referent': referent, 'signals': written}
            )
        assignment.append(machine.output_alphabet.index(written[0]))
    return DeterministicCode(machine.input_alphabet, machine.output_alphabet, tuple(assignment))


def from_code(code: DeterministicCode, state: str = 'q0') -> CodingMachine:
    """Single-state machine computing `code`."""
    while state in code.referents or state in code.signals:
        state += "'"
    transitions = {(state, referent): (state, code.signals[k])
                   for referent, k in zip(code.referents, code.assignment)}
    return CodingMachine(Alphabet((state,)), code.referents, code.signals, state, transitions)


def inverse_table(machine: CodingMachine) -> Dict[Transition, Tuple[str, str]]:
    """(state after, signal) -> (state before, referent); only reversible machines have one."""
    if not is_reversible_machine(machine):
        raise InfeasibleError("Machine is logically irreversible; its steps cannot be inverted",
                              {'collisions': [[list(p) for p in group] for group in collisions(machine)]})
    return {image: pair for pair, image in machine.transitions.items()}


def reconstruct_input(machine: CodingMachine, output: Sequence[str], final_state: str) -> Tuple[str, ...]:
    """Walk a reversible machine backwards from its final state to recover the input."""
    inverse = inverse_table(machine)
    state = final_state
    recovered: List[str] = []
    for signal in reversed(output):
        try:
            state, referent = inverse[(state, signal)]
        except KeyError:
            raise UnknownSymbolError(f"No step ends in state '{state}' writing '{signal}'",
                                     {'field': 'output', 'label': signal}) from None
        recovered.append(referent)
    if state != machine.initial_state:
        raise InvariantViolation("Backward walk did not return to the initial state",
                                 {'reached': state, 'initial_state': machine.initial_state})
    logger.debug(f"Recovered {len(recovered)} input symbols from final state '{final_state}'")
    return tuple(reversed(recovered))


def reversibilize_machine(machine: CodingMachine) -> CodingMachine:
    """
    Tag each written signal with the position of its (state, referent) pair
    inside the collision class of its image, which makes the table injective.
    """
    seen: Counter = Counter()
    tagged: Dict[Tuple[str, str], Tuple[str, int, int]] = {}
    for q in machine.states:
        for r in machine.input_alphabet:
            next_state, signal = machine.transitions[(q, r)]
            image = (next_state, signal)
            tagged[(q, r)] = (next_state, machine.output_alphabet.index(signal), seen[image])
            seen[image] += 1

    composite = sorted({(k, tag) for _, k, tag in tagged.values()})
    labels = {pair: f"{machine.output_alphabet[pair[0]]}{COMPOSITE_DELIMITER}{pair[1]}" for pair in composite}
    outputs = Alphabet(tuple(labels[pair] for pair in composite))
    logger.debug(f"Reversibilized machine writes {len(outputs)} tagged signals "
                 f"in place of {len(machine.output_alphabet)}")
    transitions = {pair: (next_state, labels[(k, tag)]) for pair, (next_state, k, tag) in tagged.items()}
    return CodingMachine(machine.states, machine.input_alphabet, outputs, machine.initial_state, transitions)
