#!/usr/bin/env python3
"""
Configuration, Logging and Error Handling Test Module

Tests the configuration layer's typed getters, the logging helpers and the
error hierarchy used by the command-line front end.
"""
import os
import sys
import json
import logging
import logging.handlers
import tempfile
import unittest

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

# Add the project root to the Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import logger as toolkit_logger
from config import Configuration, config
from error_handler import (
    AppError, FanoInfeasibleError, FileOperationError, InfeasibleError, InvariantViolation,
    SchemaError, SearchSpaceError, ValidationError, error_context, format_error_response,
    is_positive_int, validate_inputs
)


class TestConfiguration(unittest.TestCase):
    """Typed configuration getters."""

    def setUp(self):
        self.env_dir = tempfile.TemporaryDirectory()
        self.env_file = os.path.join(self.env_dir.name, '.env')
        with open(self.env_file, 'w') as f:
            f.write("ANNEAL_STEPS=2500\nEXHAUSTIVE_LIMIT=1e6\nMC_BLOCK=not-a-number\nLOG_COLORS=no\n")

    def tearDown(self):
        self.env_dir.cleanup()

    def test_001_defaults(self):
        cfg = Configuration(env_file=os.path.join(self.env_dir.name, 'missing.env'))
        self.assertEqual(cfg.get_float('ANNEAL_COOLING_RATE'), 0.999)
        self.assertEqual(cfg.get_float('DEFAULT_TEMPERATURE'), 300.0)

    def test_002_env_file_values(self):
        cfg = Configuration(env_file=self.env_file)
        if 'ANNEAL_STEPS' not in os.environ:
            self.assertEqual(cfg.get_int('ANNEAL_STEPS'), 2500)
        if 'EXHAUSTIVE_LIMIT' not in os.environ:
            self.assertEqual(cfg.get_int('EXHAUSTIVE_LIMIT'), 1000000)
        if 'LOG_COLORS' not in os.environ:
            self.assertFalse(cfg.get_bool('LOG_COLORS'))

    def test_003_invalid_value_falls_back(self):
        cfg = Configuration(env_file=self.env_file)
        if 'MC_BLOCK' not in os.environ:
            self.assertEqual(cfg.get_int('MC_BLOCK', 4096), 4096)

    def test_004_groups(self):
        cfg = Configuration(env_file=self.env_file)
        self.assertIn('synthesis', cfg.groups())
        self.assertIn('MC_TRIALS', cfg.get_group('simulation'))
        self.assertEqual(cfg.get_group('nonexistent'), {})

    def test_005_set_at_runtime(self):
        cfg = Configuration(env_file=self.env_file)
        cfg.set('MC_TRIALS', 10)
        self.assertEqual(cfg.get_int('MC_TRIALS'), 10)


class TestErrors(unittest.TestCase):
    """Error hierarchy and helpers."""

    def test_001_exit_codes(self):
        self.assertEqual(ValidationError('x').exit_code, 1)
        self.assertEqual(SchemaError('x').exit_code, 1)
        self.assertEqual(FileOperationError('x').exit_code, 1)
        self.assertEqual(SearchSpaceError('x').exit_code, 2)
        self.assertEqual(FanoInfeasibleError('x').exit_code, 2)
        self.assertTrue(issubclass(SearchSpaceError, InfeasibleError))
        self.assertEqual(InvariantViolation('x').exit_code, 1)

    def test_002_error_document(self):
        error = SchemaError("field 'map[2]': bad", {'field': 'map[2]'})
        document = format_error_response(error)
        self.assertEqual(document['error_type'], 'SchemaError')
        self.assertEqual(document['details']['field'], 'map[2]')
        json.dumps(document)

    def test_003_original_error_recorded(self):
        error = AppError('wrapped', original_error=KeyError('k'))
        self.assertEqual(error.to_dict()['details']['original_error_type'], 'KeyError')

    def test_004_validate_inputs(self):
        @validate_inputs(n=is_positive_int)
        def square(n):
            return n * n

        self.assertEqual(square(3), 9)
        with self.assertRaises(ValidationError) as ctx:
            square(0)
        self.assertEqual(ctx.exception.details['field'], 'n')
        with self.assertRaises(ValidationError):
            square(n=True)

    def test_005_error_context_prefixes(self):
        with self.assertRaises(ValidationError) as ctx:
            with error_context('code file x.json', {'path': 'x.json'}):
                raise ValidationError('bad map', {'field': 'map'})
        self.assertEqual(ctx.exception.message, 'code file x.json: bad map')
        self.assertEqual(ctx.exception.details['path'], 'x.json')

    def test_006_error_context_wraps_foreign_exceptions(self):
        with self.assertRaises(AppError) as ctx:
            with error_context('loading'):
                raise KeyError('missing')
        self.assertIn('loading', ctx.exception.message)


class TestLogging(unittest.TestCase):
    """Logging helpers."""

    def test_001_context_is_restored(self):
        self.assertEqual(toolkit_logger.get_context(), {})
        with toolkit_logger.context(command='analyze'):
            self.assertEqual(toolkit_logger.get_context(), {'command': 'analyze'})
            with toolkit_logger.context(seed=7):
                self.assertEqual(toolkit_logger.get_context(), {'command': 'analyze', 'seed': 7})
        self.assertEqual(toolkit_logger.get_context(), {})

    def test_002_json_formatter(self):
        record = logging.LogRecord('synthesis', logging.INFO, __file__, 1, 'explored %d', (256,), None)
        record.context = {'n': 4}
        document = json.loads(toolkit_logger.JsonFormatter().format(record))
        self.assertEqual(document['message'], 'explored 256')
        self.assertEqual(document['context'], {'n': 4})

    def test_003_timer_logs_duration(self):
        adapter = toolkit_logger.get_logger('tests.timer')
        with self.assertLogs('tests.timer', level='INFO') as captured:
            with adapter.timer('enumeration'):
                pass
        self.assertTrue(any('enumeration completed' in line for line in captured.output))

    def test_004_log_function_call_preserves_result(self):
        adapter = toolkit_logger.get_logger('tests.calls')

        @toolkit_logger.log_function_call(adapter)
        def add(a, b):
            return a + b

        self.assertEqual(add(2, 3), 5)
        self.assertEqual(add.__name__, 'add')

    def test_005_malformed_log_sizes_fall_back(self):
        saved = {key: config.get(key) for key in ('LOG_MAX_SIZE', 'LOG_BACKUP_COUNT', 'LOG_COLORS')}
        try:
            config.set('LOG_MAX_SIZE', 'ten megabytes')
            config.set('LOG_BACKUP_COUNT', '2.5')
            config.set('LOG_COLORS', 'sometimes')
            settings = toolkit_logger.logging_settings()
            self.assertEqual(settings.max_bytes, toolkit_logger.DEFAULT_MAX_BYTES)
            self.assertEqual(settings.backup_count, 5)
            self.assertTrue(settings.colors)
        finally:
            for key, value in saved.items():
                config.set(key, value)

    def test_006_rotating_file_handler_uses_settings(self):
        with tempfile.TemporaryDirectory() as directory:
            settings = toolkit_logger.LogSettings(logging.INFO, 'json', os.path.join(directory, 'logs', 'run.log'),
                                                  4096, 2, False)
            root = logging.getLogger()
            saved = root.handlers[:], root.level
            try:
                toolkit_logger.setup_logging(settings)
                handlers = [h for h in root.handlers if isinstance(h, logging.handlers.RotatingFileHandler)]
                self.assertEqual(len(handlers), 1)
                self.assertEqual((handlers[0].maxBytes, handlers[0].backupCount), (4096, 2))
                self.assertIsInstance(handlers[0].formatter, toolkit_logger.JsonFormatter)
            finally:
                for handler in root.handlers[:]:
                    root.removeHandler(handler)
                    handler.close()
                for handler in saved[0]:
                    root.addHandler(handler)
                root.setLevel(saved[1])


if __name__ == '__main__':
    unittest.main()
