#!/usr/bin/env python3
"""
Centralized Configuration Management for the Ambiguity Toolkit

This module provides a centralized way to handle configuration settings
across the toolkit. It includes:
- Environment variable loading (process environment first, then .env)
- Sensible defaults for every tunable
- Typed accessors with fallback to defaults on bad values
- Grouped views for logging and inspection

Usage:
    from config import config

    steps = config.get_int('ANNEAL_STEPS')
    temperature = config.get_float('DEFAULT_TEMPERATURE')
    colors = config.get_bool('LOG_COLORS', True)
"""
import os
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Set

from dotenv import dotenv_values

logger = logging.getLogger('config')


class Configuration:
    """
    Centralized configuration management with environment variable support.
    """
    CONFIG_GROUPS = {
        'logging': [
            'LOG_LEVEL', 'LOG_FORMAT', 'LOG_FILE', 'LOG_MAX_SIZE',
            'LOG_BACKUP_COUNT', 'LOG_COLORS', 'ERROR_LOG_FILE'
        ],
        'synthesis': [
            'ANNEAL_STEPS', 'ANNEAL_INITIAL_TEMPERATURE', 'ANNEAL_COOLING_RATE',
            'SYNTHESIS_TOLERANCE', 'EXHAUSTIVE_LIMIT', 'ENUMERATION_BLOCK',
            'ENUMERATION_WORKERS', 'MAX_REPORTED_CODES'
        ],
        'simulation': [
            'MC_TRIALS', 'MC_BLOCK', 'DEFAULT_SEED'
        ],
        'physics': [
            'DEFAULT_TEMPERATURE'
        ]
    }

    DEFAULTS = {
        'LOG_LEVEL': 'INFO',
        'LOG_FORMAT': 'standard',
        'LOG_MAX_SIZE': str(10 * 1024 * 1024),
        'LOG_BACKUP_COUNT': '5',
        'LOG_COLORS': 'true',
        'ANNEAL_STEPS': '100000',
        'ANNEAL_INITIAL_TEMPERATURE': '1.0',
        'ANNEAL_COOLING_RATE': '0.999',
        'SYNTHESIS_TOLERANCE': '1e-9',
        'EXHAUSTIVE_LIMIT': '100000000',
        'ENUMERATION_BLOCK': '65536',
        'ENUMERATION_WORKERS': '1',
        'MAX_REPORTED_CODES': '100000',
        'MC_TRIALS': '100000',
        'MC_BLOCK': '4096',
        'DEFAULT_SEED': '0',
        'DEFAULT_TEMPERATURE': '300.0'
    }

    def __init__(self, env_file: str = '.env'):
        """Initialize configuration from environment variables and a .env file."""
        self._config: Dict[str, str] = {}
        self._env_file = Path(env_file)
        self._load()

    def _load(self):
        """Load configuration from the environment, then .env, then defaults."""
        file_values = {}
        if self._env_file.exists():
            try:
                file_values = dotenv_values(self._env_file)
            except Exception as e:
                logger.warning(f"Error reading {self._env_file}: {str(e)}")

        for key in self._get_all_config_keys():
            value = os.environ.get(key)
            if value is None:
                value = file_values.get(key)
            if value is None:
                value = self.DEFAULTS.get(key)
            if value is not None:
                self._config[key] = value

        self._log_configuration()

    def _get_all_config_keys(self) -> Set[str]:
        """Get all configuration keys from all groups."""
        keys = set()
        for group_keys in self.CONFIG_GROUPS.values():
            keys.update(group_keys)
        return keys

    def _log_configuration(self):
        """Log the current configuration at debug level."""
        for group, keys in self.CONFIG_GROUPS.items():
            group_values = {key: self._config[key] for key in keys if key in self._config}
            if group_values:
                logger.debug(f"{group.upper()} configuration: {json.dumps(group_values)}")

    def get(self, key: str, default: Any = None) -> Optional[str]:
        """
        Get a configuration value.

        Args:
            key: The configuration key
            default: Default value if the key is not found

        Returns:
            The configuration value as a string
        """
        return self._config.get(key, default)

    def get_int(self, key: str, default: Optional[int] = None) -> Optional[int]:
        """Get a configuration value as an integer."""
        value = self.get(key)
        if value is None:
            return default
        try:
            return int(value)
        except (ValueError, TypeError):
            pass
        # Accept scientific notation such as 1e8 when it is integral
        try:
            as_float = float(value)
            if as_float.is_integer():
                return int(as_float)
            raise ValueError(value)
        except (ValueError, TypeError):
            logger.warning(f"Invalid integer value for {key}: {value}, using default: {default}")
            return default if default is not None else self._default_as(key, int)

    def get_float(self, key: str, default: Optional[float] = None) -> Optional[float]:
        """Get a configuration value as a float."""
        value = self.get(key)
        if value is None:
            return default
        try:
            return float(value)
        except (ValueError, TypeError):
            logger.warning(f"Invalid float value for {key}: {value}, using default: {default}")
            return default if default is not None else self._default_as(key, float)

    def get_bool(self, key: str, default: Optional[bool] = None) -> Optional[bool]:
        """Get a configuration value as a boolean."""
        value = self.get(key)
        if value is None:
            return default

        if value.lower() in ('true', 'yes', 'y', '1'):
            return True
        if value.lower() in ('false', 'no', 'n', '0'):
            return False

        logger.warning(f"Invalid boolean value for {key}: {value}, using default: {default}")
        return default

    def get_path(self, key: str, default: Optional[str] = None) -> Optional[Path]:
        """Get a configuration value as a Path object."""
        value = self.get(key)
        if not value:
            return Path(default) if default else None
        return Path(value)

    def _default_as(self, key: str, kind):
        raw = self.DEFAULTS.get(key)
        if raw is None:
            return None
        return kind(float(raw)) if kind is int else kind(raw)

    def get_all(self) -> Dict[str, str]:
        """Get a copy of all configuration values."""
        return self._config.copy()

    def get_group(self, group: str) -> Dict[str, str]:
        """Get all configuration values for a specific group."""
        if group not in self.CONFIG_GROUPS:
            return {}
        return {key: self._config[key] for key in self.CONFIG_GROUPS[group] if key in self._config}

    def groups(self) -> List[str]:
        return list(self.CONFIG_GROUPS)

    def set(self, key: str, value: Any):
        """Set a configuration value at runtime (not persisted)."""
        self._config[key] = str(value)
        logger.info(f"Set configuration {key}={value}")


# Create singleton instance
config = Configuration()

if __name__ == "__main__":
    import argparse
    parser = argparse.ArgumentParser(description='Ambiguity Toolkit configuration')
    parser.add_argument('--group', help='Show only configuration for this group')
    args = parser.parse_args()

    groups = [args.group] if args.group else config.groups()
    for group in groups:
        group_config = config.get_group(group)
        if not group_config:
            print(f"No configuration found for group: {group}")
            continue
        print(f"\n{group.upper()} Configuration:")
        for key, value in group_config.items():
            print(f"  {key}={value}")
