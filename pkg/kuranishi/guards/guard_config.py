"""Input limits and validation for spec files and command-line values."""
import logging
import os
import re

from ..errors import SpecError
from ..settings import Settings

logger = logging.getLogger(__name__)


class GuardConfig:
    """Limits applied before any algebra runs."""
    MAX_SPEC_BYTES = Settings.MAX_SPEC_BYTES
    MAX_RANK = Settings.MAX_RANK
    MAX_ARITY = Settings.MAX_ARITY
    LABEL_PATTERN = r"^[A-Za-z0-9_.*]{1,64}$"
    RATIONAL_PATTERN = r"^-?\d+(/\d+)?$"


class InputValidator:
    """Validation utilities for untrusted input."""

    @staticmethod
    def validate_spec_text(text: str) -> str:
        """
        Check type and size of a spec document before parsing.

        Args:
            text: Raw document

        Returns:
            str: The same text

        Raises:
            SpecError: Not a string, or larger than the configured limit
        """
        if not isinstance(text, str):
            raise SpecError(f"Spec must be text, got {type(text).__name__}", 1, 1)
        size = len(text.encode("utf-8"))
        if size > GuardConfig.MAX_SPEC_BYTES:
            logger.warning(f"Spec of {size} bytes exceeds the limit of {GuardConfig.MAX_SPEC_BYTES}")
            raise SpecError(f"spec exceeds {GuardConfig.MAX_SPEC_BYTES} bytes", 1, 1)
        return text

    @staticmethod
    def validate_label(label) -> bool:
        return isinstance(label, str) and re.match(GuardConfig.LABEL_PATTERN, label) is not None

    @staticmethod
    def validate_rational(text) -> bool:
        """True for exact "p" or "p/q" strings; decimals and floats are rejected."""
        return isinstance(text, str) and re.match(GuardConfig.RATIONAL_PATTERN, text.strip()) is not None

    @staticmethod
    def validate_rank(rank: int) -> bool:
        if rank > GuardConfig.MAX_RANK:
            logger.warning(f"Module rank {rank} exceeds the limit of {GuardConfig.MAX_RANK}")
            return False
        return True

    @staticmethod
    def validate_arity(arity: int) -> bool:
        return 0 <= arity <= GuardConfig.MAX_ARITY


def safe_log(message: str, sensitive: bool = False) -> None:
    """
    Log a message that may echo user data; sensitive payloads only under KURANISHI_DEBUG.

    Args:
        message: The message to log
        sensitive: Whether the message contains user-supplied structure data
    """
    if sensitive and not os.getenv("KURANISHI_DEBUG"):
        logger.debug("Sensitive payload suppressed outside debug mode")
        return
    logger.info(message)
