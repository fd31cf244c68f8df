#!/usr/bin/env python3
"""
Command-line front end.

Reads code, prior, channel and machine documents (JSON), dispatches to the
analysis, synthesis, simulation and machine modules, and writes one report
document to standard output. Logs and error documents go to standard error.

Usage:
    python cli.py analyze --code samples/and_gate.json [--channel FILE] [--temperature K]
    python cli.py synthesize --n 4 --m 4 --method exhaustive --tol 1e-9 [--out DIR]
    python cli.py simulate --code samples/balanced4.json --trials 100000 --seed 7
    python cli.py machine check --machine samples/and_machine.json
    python cli.py machine run --machine samples/alternator_machine.json --input a,b,a
    python cli.py machine project --machine samples/and_machine.json
    python cli.py sweep --family balanced --max-n 25

Exit codes: 0 success, 1 invalid input, 2 infeasible request.
"""
import io
import os
import csv
import sys
import json
import math
import numbers
import argparse
import contextlib
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from jsonschema import Draft7Validator
from jsonschema.exceptions import best_match

import code_model
import coding_machine
import info_measures
import simulate
import synthesis
from code_model import Alphabet, DeterministicCode, Prior, StochasticChannel
from config import config
from error_handler import (
    AlignmentError, AppError, FileOperationError, SchemaError, ValidationError, error_context,
    format_error_response
)
from logger import context, get_logger
from version import TOOL_NAME, __version__

logger = get_logger('cli')

SIGNIFICANT_DIGITS = 6

_LABELS = {
    'type': 'array',
    'minItems': 1,
    'uniqueItems': True,
    'items': {'type': 'string', 'minLength': 1},
}
_PROBABILITIES = {
    'type': 'array',
    'minItems': 1,
    'items': {'type': 'number', 'minimum': 0},
}

CODE_SCHEMA = {
    'type': 'object',
    'required': ['referents', 'signals', 'map'],
    'properties': {
        'referents': _LABELS,
        'signals': _LABELS,
        'prior': _PROBABILITIES,
        'map': {'type': 'array', 'minItems': 1, 'items': {'type': 'integer', 'minimum': 0}},
    },
    'additionalProperties': False,
}

PRIOR_SCHEMA = {
    'type': 'object',
    'required': ['prior'],
    'properties': {'prior': _PROBABILITIES},
    'additionalProperties': False,
}

CHANNEL_SCHEMA = {
    'type': 'object',
    'required': ['matrix'],
    'properties': {
        'matrix': {'type': 'array', 'minItems': 1, 'items': _PROBABILITIES},
        'outputs': _LABELS,
    },
    'additionalProperties': False,
}

MACHINE_SCHEMA = {
    'type': 'object',
    'required': ['states', 'input_alphabet', 'output_alphabet', 'initial_state', 'transitions'],
    'properties': {
        'states': _LABELS,
        'input_alphabet': _LABELS,
        'output_alphabet': _LABELS,
        'initial_state': {'type': 'string', 'minLength': 1},
        'transitions': {
            'type': 'array',
            'minItems': 1,
            'items': {
                'type': 'object',
                'required': ['state', 'read', 'next', 'write'],
                'properties': {
                    'state': {'type': 'string'},
                    'read': {'type': 'string'},
                    'next': {'type': 'string'},
                    'write': {'type': 'string'},
                    'move': {'enum': [coding_machine.MOVE_RIGHT]},
                },
                'additionalProperties': False,
            },
        },
    },
    'additionalProperties': False,
}


class CLIParser(argparse.ArgumentParser):
    """Argument parser that reports problems as validation errors instead of exiting."""

    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}", {'field': 'argv'})


# Documents

def _field_path(path: Iterable) -> str:
    rendered = ''
    for part in path:
        if isinstance(part, int):
            rendered += f"[{part}]"
        else:
            rendered += f".{part}" if rendered else str(part)
    return rendered or '$'


def _schema_field(error) -> str:
    path = list(error.absolute_path)
    if error.validator == 'required' and isinstance(error.instance, dict):
        missing = [name for name in error.validator_value if name not in error.instance]
        if missing:
            path.append(missing[0])
    elif error.validator == 'additionalProperties' and isinstance(error.instance, dict):
        known = error.schema.get('properties', {})
        extra = sorted(name for name in error.instance if name not in known)
        if extra:
            path.append(extra[0])
    return _field_path(path)


def validate_document(document: Any, schema: Dict[str, Any], kind: str):
    """
    Raises:
        SchemaError: naming the first offending field, e.g. map[2]
    """
    error = best_match(Draft7Validator(schema).iter_errors(document))
    if error is not None:
        field_name = _schema_field(error)
        raise SchemaError(f"{kind} document: field '{field_name}': {error.message}",
                          {'field': field_name, 'document': kind})


def load_document(path: str, kind: str) -> Any:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise FileOperationError(f"{kind} file not found: {path}", {'field': kind, 'path': path}, e)
    except OSError as e:
        raise FileOperationError(f"Cannot read {kind} file {path}: {e}", {'field': kind, 'path': path}, e)
    except UnicodeDecodeError as e:
        raise SchemaError(f"{kind} file {path}: not UTF-8 text (byte offset {e.start})",
                          {'field': kind, 'path': path, 'offset': e.start}, e)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{kind} file {path}: line {e.lineno} column {e.colno}: {e.msg}",
                          {'field': kind, 'path': path, 'line': e.lineno, 'column': e.colno}, e)


@contextlib.contextmanager
def _addressed(kind: str, path: str):
    """Prefix semantic errors with the file and make sure the offending field is named."""
    with error_context(f"{kind} file {path}"):
        try:
            yield
        except ValidationError as e:
            field_name = e.details.get('field')
            if field_name and f"'{field_name}'" not in e.message:
                e.message = f"field '{field_name}': {e.message}"
                e.args = (e.message,)
            raise


def parse_code_document(document: Any, kind: str = 'code') -> Tuple[DeterministicCode, Prior]:
    validate_document(document, CODE_SCHEMA, kind)
    referents = Alphabet(tuple(document['referents']))
    signals = Alphabet(tuple(document['signals']))
    code = DeterministicCode(referents, signals, tuple(document['map']))
    if 'prior' in document:
        if len(document['prior']) != code.n:
            raise AlignmentError(
                f"prior has {len(document['prior'])} entries for {code.n} referents",
                {'field': 'prior', 'expected': code.n, 'actual': len(document['prior'])}
            )
        prior = Prior(document['prior'])
    else:
        prior = Prior.uniform(code.n)
    return code, prior


def load_code(path: str) -> Tuple[DeterministicCode, Prior]:
    document = load_document(path, 'code')
    with _addressed('code', path):
        return parse_code_document(document)


def load_prior(path: str, n: int) -> Prior:
    document = load_document(path, 'prior')
    with _addressed('prior', path):
        validate_document(document, PRIOR_SCHEMA, 'prior')
        if len(document['prior']) != n:
            raise AlignmentError(f"prior has {len(document['prior'])} entries for n = {n}",
                                  {'field': 'prior', 'expected': n, 'actual': len(document['prior'])})
        return Prior(document['prior'])


def load_channel(path: str, code: DeterministicCode) -> StochasticChannel:
    """Channel document; without 'outputs' a square channel reuses the code's signal labels."""
    document = load_document(path, 'channel')
    with _addressed('channel', path):
        validate_document(document, CHANNEL_SCHEMA, 'channel')
        matrix = document['matrix']
        width = len(matrix[0])
        for k, row in enumerate(matrix):
            if len(row) != width:
                raise SchemaError(f"row {k} has {len(row)} entries, expected {width}", {'field': f"matrix[{k}]"})
        if len(matrix) != code.m:
            raise AlignmentError(f"channel has {len(matrix)} input rows for {code.m} signals",
                                 {'field': 'matrix', 'expected': code.m, 'actual': len(matrix)})
        if 'outputs' in document:
            outputs = Alphabet(tuple(document['outputs']))
        elif width == code.m:
            outputs = code.signals
        else:
            outputs = None
        return StochasticChannel(np.array(matrix, dtype=float), outputs)


def load_machine(path: str) -> coding_machine.CodingMachine:
    document = load_document(path, 'machine')
    with _addressed('machine', path):
        validate_document(document, MACHINE_SCHEMA, 'machine')
        transitions = {}
        for i, entry in enumerate(document['transitions']):
            pair = (entry['state'], entry['read'])
            if pair in transitions:
                raise SchemaError(f"duplicate transition for ({pair[0]}, {pair[1]})",
                                  {'field': f"transitions[{i}]"})
            transitions[pair] = (entry['next'], entry['write'])
        return coding_machine.CodingMachine(
            Alphabet(tuple(document['states'])),
            Alphabet(tuple(document['input_alphabet'])),
            Alphabet(tuple(document['output_alphabet'])),
            document['initial_state'],
            transitions,
        )


def code_document(code: DeterministicCode, prior: Optional[Prior] = None) -> Dict[str, Any]:
    """CodeSpecFile for a code; the prior is omitted when not given."""
    document = {
        'referents': list(code.referents),
        'signals': list(code.signals),
        'map': list(code.assignment),
    }
    if prior is not None:
        document['prior'] = [float(p) for p in prior.probabilities]
    return document


# Reports

def render(value: Any) -> Any:
    """Floats become {'rounded': 6 significant digits, 'value': full precision}."""
    if isinstance(value, (bool, np.bool_)) or value is None:
        return bool(value) if value is not None else None
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, numbers.Real):
        value = float(value)
        if not math.isfinite(value):
            return {'rounded': None, 'value': repr(value)}
        return {'rounded': float(f"{value:.{SIGNIFICANT_DIGITS}g}"), 'value': value}
    if isinstance(value, dict):
        return {str(k): render(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [render(v) for v in value]
    return value


def envelope(command: str, payload: Dict[str, Any], seed: Optional[int] = None) -> Dict[str, Any]:
    return {'tool': TOOL_NAME, 'version': __version__, 'command': command, 'seed': seed, **payload}


def dumps(document: Any, rendered: bool = True) -> str:
    return json.dumps(render(document) if rendered else document, indent=2, sort_keys=True) + '\n'


def csv_table(rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator='\n', extrasaction='ignore')
    writer.writeheader()
    for row in rows:
        writer.writerow({key: repr(value) if isinstance(value, float) else value for key, value in row.items()})
    return buffer.getvalue()


# Commands

INFO_COLUMNS = ('h_omega', 'h_s', 'h_joint', 'h_omega_given_s', 'h_s_given_omega', 'mutual_information',
                'symmetry_residual', 'reversible', 'ambiguity_class')


def cmd_analyze(args) -> str:
    code, prior = load_code(args.code)
    temperature = args.temperature if args.temperature is not None else config.get_float('DEFAULT_TEMPERATURE', 300.0)
    joint = code_model.joint_distribution(code, prior)
    report = info_measures.info_report(joint)
    heat = info_measures.landauer(report.h_omega_given_s, temperature)
    payload = {
        'info': report.to_dict(),
        'landauer': heat.to_dict(),
        'fano': simulate.fano_check(code, prior).to_dict(),
        'logically_reversible': code_model.is_logically_reversible(code, prior),
    }
    if args.channel:
        channel = load_channel(args.channel, code)
        payload['composed'] = info_measures.info_report(code_model.compose_with_channel(code, prior, channel)).to_dict()

    if args.csv:
        row = dict(report.to_dict(), erased_bits=heat.erased_bits, entropy_generation=heat.entropy_generation,
                   heat_at_temperature=heat.heat_at_temperature, temperature=heat.temperature)
        return csv_table([row], INFO_COLUMNS + ('erased_bits', 'entropy_generation', 'heat_at_temperature',
                                                'temperature'))
    return dumps(envelope('analyze', payload))


def cmd_synthesize(args) -> str:
    prior = None
    if args.prior and args.prior != 'uniform':
        prior = load_prior(args.prior, args.n)
    overrides = {name: value for name, value in (
        ('tolerance', args.tol), ('seed', args.seed), ('anneal_steps', args.steps), ('workers', args.workers)
    ) if value is not None}
    synthesis_config = synthesis.SynthesisConfig(n=args.n, m=args.m, prior=prior, method=args.method, **overrides)

    with context(method=synthesis_config.method.value, n=args.n, m=args.m):
        result = synthesis.synthesize(synthesis_config)

    resolved_prior = synthesis_config.resolved_prior()
    files = []
    if args.out:
        try:
            os.makedirs(args.out, exist_ok=True)
            for i, code in enumerate(result.codes):
                path = os.path.join(args.out, f"code_{i:04d}.json")
                with open(path, 'w', encoding='utf-8') as f:
                    f.write(dumps(code_document(code, resolved_prior), rendered=False))
                files.append(path)
        except OSError as e:
            raise FileOperationError(f"Cannot write codes to {args.out}: {e}", {'field': 'out', 'path': args.out}, e)
        logger.info(f"Wrote {len(files)} code files to {args.out}")

    if args.csv:
        rows = [{'index': i, 'map': ' '.join(str(k) for k in code.assignment), 'residual': residual}
                for i, (code, residual) in enumerate(zip(result.codes, result.residuals))]
        return csv_table(rows, ('index', 'map', 'residual'))

    payload = {
        'n': args.n,
        'm': args.m,
        'tolerance': synthesis_config.tolerance,
        'prior': 'uniform' if prior is None else [float(p) for p in prior.probabilities],
        'result': result.to_dict(),
        'files': files,
    }
    seed = synthesis_config.seed if synthesis_config.method is synthesis.SynthesisMethod.ANNEAL else None
    return dumps(envelope('synthesize', payload, seed))


def cmd_simulate(args) -> str:
    code, prior = load_code(args.code)
    channel = load_channel(args.channel, code) if args.channel else None
    if args.decoder == simulate.COMPOSED:
        if channel is None:
            raise ValidationError("--decoder composed needs --channel", {'field': 'decoder'})
        rule = simulate.map_decoder_through_channel(code, prior, channel)
    else:
        rule = simulate.map_decoder(code, prior)

    with context(command='simulate', seed=args.seed):
        report = simulate.monte_carlo_error(code, prior, rule, trials=args.trials, seed=args.seed,
                                            channel=channel, workers=args.workers)
    if args.csv:
        return csv_table([report.to_dict()], tuple(report.to_dict()))
    payload = {
        'report': report.to_dict(),
        'fano': simulate.fano_check(code, prior).to_dict(),
        'decoder': rule.to_dict(),
    }
    return dumps(envelope('simulate', payload, report.seed))


def cmd_machine(args) -> str:
    machine = load_machine(args.machine)
    if args.action == 'check':
        payload = {
            'reversible': coding_machine.is_reversible_machine(machine),
            'collisions': [[list(pair) for pair in group] for group in coding_machine.collisions(machine)],
        }
        return dumps(envelope('machine check', payload))
    if args.action == 'run':
        symbols = [s.strip() for s in args.input.split(',')] if args.input.strip() else []
        trace = coding_machine.run(machine, symbols)
        return dumps(envelope('machine run', {'trace': trace.to_dict()}))
    return dumps(code_document(coding_machine.project_to_code(machine)), rendered=False)


SWEEP_COLUMNS = ('n', 'h_omega', 'h_s', 'ambiguity', 'residual', 'exact_map_error', 'fano_bound',
                 'landauer_entropy')


def sweep_rows(family: str, max_n: int, temperature: float) -> List[Dict[str, Any]]:
    """One row per n of the chosen code family under the uniform prior."""
    rows = []
    for n in range(1, max_n + 1):
        if family == 'balanced':
            if math.isqrt(n) ** 2 != n:
                continue
            code = synthesis.balanced_partition_code(n)
        else:
            code = synthesis.extreme_code(family, n)
        prior = Prior.uniform(n)
        report = info_measures.info_report(code_model.joint_distribution(code, prior))
        check = simulate.fano_check(code, prior)
        rows.append({
            'n': n,
            'h_omega': report.h_omega,
            'h_s': report.h_s,
            'ambiguity': report.h_omega_given_s,
            'residual': report.symmetry_residual,
            'exact_map_error': check.exact_map_error,
            'fano_bound': check.fano_bound,
            'landauer_entropy': info_measures.landauer(report.h_omega_given_s, temperature).entropy_generation,
        })
    return rows


def cmd_sweep(args) -> str:
    if args.max_n < 1:
        raise ValidationError("--max-n must be at least 1", {'field': 'max_n', 'value': args.max_n})
    temperature = args.temperature if args.temperature is not None else config.get_float('DEFAULT_TEMPERATURE', 300.0)
    rows = sweep_rows(args.family, args.max_n, temperature)
    if args.csv:
        return csv_table(rows, SWEEP_COLUMNS)
    return dumps(envelope('sweep', {'family': args.family, 'temperature': temperature, 'rows': rows}))


def build_parser() -> CLIParser:
    parser = CLIParser(prog='cli.py', description='Ambiguity, symmetry and irreversibility of codes')
    parser.add_argument('--version', action='version', version=f"{TOOL_NAME} {__version__}")
    subparsers = parser.add_subparsers(dest='command', required=True)

    table_output = CLIParser(add_help=False)
    table_output.add_argument('--csv', action='store_true', help='Emit a flat CSV table instead of JSON')

    analyze = subparsers.add_parser('analyze', parents=[table_output], help='Information report for a code')
    analyze.add_argument('--code', required=True, help='Code document')
    analyze.add_argument('--channel', help='Channel document applied after the code')
    analyze.add_argument('--temperature', type=float, help='Temperature in kelvin for Landauer heat')
    analyze.set_defaults(handler=cmd_analyze)

    synth = subparsers.add_parser('synthesize', parents=[table_output], help='Search codes satisfying the symmetry equation')
    synth.add_argument('--n', type=int, required=True, help='Number of referents')
    synth.add_argument('--m', type=int, required=True, help='Number of signals')
    synth.add_argument('--prior', default='uniform', help="Prior document, or 'uniform'")
    synth.add_argument('--method', choices=[m.value for m in synthesis.SynthesisMethod],
                       default=synthesis.SynthesisMethod.EXHAUSTIVE.value)
    synth.add_argument('--tol', type=float, help='Acceptance threshold on |residual| in bits')
    synth.add_argument('--seed', type=int, help='Annealing seed')
    synth.add_argument('--steps', type=int, help='Annealing steps')
    synth.add_argument('--workers', type=int, help='Enumeration threads')
    synth.add_argument('--out', help='Directory receiving one code document per found code')
    synth.set_defaults(handler=cmd_synthesize)

    sim = subparsers.add_parser('simulate', parents=[table_output], help='Monte Carlo transmission')
    sim.add_argument('--code', required=True, help='Code document')
    sim.add_argument('--channel', help='Channel document')
    sim.add_argument('--trials', type=int, default=config.get_int('MC_TRIALS', 100000))
    sim.add_argument('--seed', type=int, default=config.get_int('DEFAULT_SEED', 0))
    sim.add_argument('--decoder', choices=[simulate.NOISELESS, simulate.COMPOSED], default=simulate.NOISELESS,
                     help='Joint the MAP decoder is built from')
    sim.add_argument('--workers', type=int, default=1, help='Simulation threads')
    sim.set_defaults(handler=cmd_simulate)

    machine = subparsers.add_parser('machine', help='Coding machine tools')
    machine.add_argument('action', choices=['check', 'run', 'project'])
    machine.add_argument('--machine', required=True, help='Machine document')
    machine.add_argument('--input', default='', help='Comma-separated referent labels (run)')
    machine.set_defaults(handler=cmd_machine)

    sweep = subparsers.add_parser('sweep', parents=[table_output], help='Quantities across a code family')
    sweep.add_argument('--family', choices=['balanced', 'one_to_one', 'all_to_one'], required=True)
    sweep.add_argument('--max-n', dest='max_n', type=int, required=True)
    sweep.add_argument('--temperature', type=float, help='Temperature in kelvin for Landauer entropy')
    sweep.set_defaults(handler=cmd_sweep)
    return parser


def run_command(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    """Parse argv, run one command, and return the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        with context(command=args.command):
            output = args.handler(args)
    except SystemExit as e:
        return int(e.code or 0)
    except AppError as e:
        e.log()
        stderr.write(json.dumps(format_error_response(e), indent=2, sort_keys=True, default=str) + '\n')
        return e.exit_code
    stdout.write(output)
    return 0


def main() -> int:
    return run_command(sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
