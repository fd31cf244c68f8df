#!/usr/bin/env python3
"""
Error Handling Module for the Ambiguity Toolkit.

This module provides centralized error types, standardized error formatting
and consistent logging for the library and the command-line front end.

Two families matter to callers:
- ValidationError and its subclasses: the input is malformed (CLI exit 1)
- InfeasibleError and its subclasses: the input is well formed but the
  request cannot be served (CLI exit 2)
"""
import time
import json
import logging
import numbers
import traceback
import functools
from typing import Any, Callable, Dict, Optional, Union

try:
    from config import config
except ImportError:
    config = None

logger = logging.getLogger('error_handler')

ERROR_LOG_FILE = config.get_path('ERROR_LOG_FILE') if config else None


class AppError(Exception):
    """Base class for toolkit errors."""

    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None, original_error: Optional[Exception] = None):
        """
        Initialize a new toolkit error.

        Args:
            message: Human-readable error message
            details: Additional details about the error (optional)
            original_error: The original exception that caused this error (optional)
        """
        self.message = message
        self.details = details or {}
        self.original_error = original_error

        if original_error is not None:
            self.details['original_error_type'] = original_error.__class__.__name__

        super().__init__(message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert the error to a dictionary for JSON serialization."""
        error_dict = {
            'error': True,
            'error_type': self.__class__.__name__,
            'message': self.message
        }
        if self.details:
            error_dict['details'] = self.details
        return error_dict

    def log(self, log_level: int = logging.ERROR):
        """Log the error with appropriate level and details."""
        log_message = f"{self.__class__.__name__}: {self.message}"
        if self.original_error:
            log_message += f" (Original error: {self.original_error})"

        logger.log(log_level, log_message)
        if self.details:
            logger.log(log_level, f"Error details: {json.dumps(self.details, default=str)}")

        self._log_to_file(log_message)

    def _log_to_file(self, message: str):
        """Append the error to the dedicated error log file, when configured."""
        if not ERROR_LOG_FILE:
            return
        try:
            timestamp = time.strftime("%Y-%m-%d %H:%M:%S")
            with open(ERROR_LOG_FILE, 'a') as f:
                f.write(f"[{timestamp}] {message}\n")
                if self.original_error and self.original_error.__traceback__:
                    tb_str = ''.join(traceback.format_exception(
                        type(self.original_error),
                        self.original_error,
                        self.original_error.__traceback__
                    ))
                    f.write(f"Traceback:\n{tb_str}\n")
                f.write("-" * 80 + "\n")
        except Exception as e:
            logger.warning(f"Error writing to log file: {str(e)}")

    def __str__(self) -> str:
        return self.message


class ValidationError(AppError):
    """Input data failed validation."""
    exit_code = 1


class AlignmentError(ValidationError):
    """Two objects that must share a dimension do not."""
    pass


class DistributionError(ValidationError):
    """A probability vector or stochastic matrix is invalid."""
    pass


class SchemaError(ValidationError):
    """A document does not match its schema; details['field'] names the culprit."""
    pass


class UnknownSymbolError(ValidationError):
    """A label does not belong to the alphabet it was read against."""
    pass


class FileOperationError(AppError):
    """Error related to file operations."""
    exit_code = 1


class InfeasibleError(AppError):
    """The request is well formed but cannot be served."""
    exit_code = 2


class SearchSpaceError(InfeasibleError):
    """Exhaustive enumeration would exceed the configured guard."""
    pass


class ProjectionUndefinedError(InfeasibleError):
    """A machine writes state-dependent signals and has no stateless code."""
    pass


class FanoInfeasibleError(InfeasibleError):
    """The requested conditional entropy exceeds log2 n."""
    pass


class InvariantViolation(AppError):
    """An internal consistency check failed."""
    exit_code = 1


def validate_inputs(**param_validators) -> Callable:
    """
    Decorator for input validation.

    Args:
        **param_validators: Mapping of parameter names to predicate functions

    Returns:
        Decorator function
    """
    def decorator(func: Callable) -> Callable:
        varnames = func.__code__.co_varnames[:func.__code__.co_argcount]

        @functools.wraps(func)
        def wrapper(*args, **kwargs) -> Any:
            bound = dict(zip(varnames, args))
            bound.update(kwargs)
            for param_name, validator in param_validators.items():
                if param_name in bound and not validator(bound[param_name]):
                    raise ValidationError(
                        f"Invalid value for parameter '{param_name}' in {func.__name__}",
                        {'field': param_name, 'value': repr(bound[param_name])}
                    )
            return func(*args, **kwargs)

        return wrapper

    return decorator


def is_positive_int(value):
    """Validate that a value is a positive integer."""
    return isinstance(value, numbers.Integral) and not isinstance(value, bool) and value > 0


def is_non_negative_number(value):
    """Validate that a value is a finite non-negative number."""
    return isinstance(value, numbers.Real) and not isinstance(value, bool) and value == value and 0 <= value < float('inf')


def is_positive_number(value):
    """Validate that a value is a finite positive number."""
    return is_non_negative_number(value) and value > 0


def is_within_range(min_val, max_val):
    """Create a validator for a number within a closed range."""
    def validator(value):
        return isinstance(value, numbers.Real) and min_val <= value <= max_val
    return validator


def format_error_response(error: Union[AppError, Exception], include_traceback: bool = False) -> Dict[str, Any]:
    """
    Format an error as a document.

    Args:
        error: The error to format
        include_traceback: Whether to include the traceback in the response

    Returns:
        Dictionary with error information
    """
    if isinstance(error, AppError):
        response = error.to_dict()
    else:
        response = {
            'error': True,
            'error_type': error.__class__.__name__,
            'message': str(error)
        }

    if include_traceback:
        response['traceback'] = traceback.format_exc()

    return response


class error_context:
    """Context manager for adding context to exceptions."""

    def __init__(self, context: str, details: Optional[Dict[str, Any]] = None):
        """
        Args:
            context: Context description, prefixed to the error message
            details: Additional details to include
        """
        self.context = context
        self.details = details or {}

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if exc_val is None:
            return False
        if isinstance(exc_val, AppError):
            exc_val.message = f"{self.context}: {exc_val.message}"
            exc_val.args = (exc_val.message,)
            for key, value in self.details.items():
                exc_val.details.setdefault(key, value)
            return False
        if isinstance(exc_val, Exception):
            app_error = AppError(
                message=f"{self.context}: {str(exc_val)}",
                details=dict(self.details),
                original_error=exc_val
            )
            raise app_error from exc_val
        return False
