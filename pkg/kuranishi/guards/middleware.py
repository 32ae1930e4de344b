"""Decorators wrapping spec parsing and command handlers."""
import functools
import logging
from typing import Any, Callable

from ..errors import CertificateError, KuranishiError, LinearizationNotSurjective
from .guard_config import InputValidator, safe_log

logger = logging.getLogger(__name__)

EXIT_INPUT_ERROR = 2
EXIT_METHOD_LIMIT = 3

# Errors meaning the method could not decide, as opposed to bad input
METHOD_LIMIT_ERRORS = (LinearizationNotSurjective, CertificateError)


def validate_input(func: Callable) -> Callable:
    """
    Decorator checking a spec document's type and size before it is parsed.

    Args:
        func: Function taking the document text first

    Returns:
        Wrapped function
    """
    @functools.wraps(func)
    def wrapper(text: str, *args: Any, **kwargs: Any) -> Any:
        return func(InputValidator.validate_spec_text(text), *args, **kwargs)
    return wrapper


def error_handler(func: Callable) -> Callable:
    """
    Decorator turning exceptions of a command handler into an error record.

    The record is a dict with "error", "error_type" and "exit_code"; internal
    errors get a generic message and their details go to the log only.

    Args:
        func: The command handler

    Returns:
        Error-handled function
    """
    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except METHOD_LIMIT_ERRORS as e:
            safe_log(f"Method limitation in {func.__name__}: {str(e)}")
            return {"error": str(e), "error_type": type(e).__name__, "exit_code": EXIT_METHOD_LIMIT}
        except KuranishiError as e:
            safe_log(f"Input error in {func.__name__}: {str(e)}")
            return {"error": str(e), "error_type": type(e).__name__, "exit_code": EXIT_INPUT_ERROR}
        except (MemoryError, RecursionError) as e:
            logger.error(f"Resource exhausted in {func.__name__}: {type(e).__name__}")
            return {"error": "Resource limit reached", "error_type": type(e).__name__,
                    "exit_code": EXIT_METHOD_LIMIT}
        except Exception as e:
            logger.exception(f"Internal error in {func.__name__}: {str(e)}")
            return {"error": "An internal error occurred", "error_type": "InternalError",
                    "exit_code": EXIT_METHOD_LIMIT}
    return wrapper


def audit_log(func: Callable) -> Callable:
    """
    Decorator logging each command call and its completion.

    Args:
        func: The function to wrap

    Returns:
        Audit-logged function
    """
    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        safe_log(f"Audit: Calling {func.__name__} with args: {args}, kwargs: {kwargs}", sensitive=True)
        result = func(*args, **kwargs)
        safe_log(f"Audit: {func.__name__} completed")
        return result
    return wrapper
