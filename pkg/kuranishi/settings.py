"""Runtime settings read from kuranishi.json, overridable through the environment."""
import json
import logging
import os
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

ROOT = Path(__file__).resolve().parent.parent


def load_config(path=None) -> Dict[str, Any]:
    """
    Read the context.config object of a configuration document.

    Args:
        path: Document path; defaults to $KURANISHI_CONFIG or kuranishi.json at the repository root

    Returns:
        Dict[str, Any]: The config object, empty when the document is missing or malformed
    """
    path = Path(path or os.getenv("KURANISHI_CONFIG", ROOT / "kuranishi.json"))
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
        return data["context"]["config"]
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as e:
        logger.debug(f"No usable configuration at {path}: {str(e)}")
        return {}


_CONFIG = load_config()
_LOGGING = _CONFIG.get("logging", {})
_SESSION = _CONFIG.get("session", {})
_LIMITS = _CONFIG.get("limits", {})
_TOLERANCES = _CONFIG.get("tolerances", {})


class Settings:
    """Session defaults; CLI flags override spec-file cutoffs, which override these."""
    LOG_LEVEL = os.getenv("KURANISHI_LOG_LEVEL", _LOGGING.get("log_level", "WARNING"))
    ENERGY_CUTOFF = Fraction(os.getenv("KURANISHI_ENERGY_CUTOFF", str(_SESSION.get("energy_cutoff", "3"))))
    ARITY_CUTOFF = int(os.getenv("KURANISHI_ARITY_CUTOFF", str(_SESSION.get("arity_cutoff", 6))))
    SEED = int(os.getenv("KURANISHI_SEED", str(_SESSION.get("seed", 1729))))
    SAMPLES = int(os.getenv("KURANISHI_SAMPLES", str(_SESSION.get("samples", 10))))
    SYMBOLIC_WEIGHT = Fraction(str(_SESSION.get("symbolic_weight", "1/2")))
    MAX_SPEC_BYTES = int(os.getenv("KURANISHI_MAX_SPEC_BYTES", str(_LIMITS.get("max_spec_bytes", 1048576))))
    MAX_RANK = int(_LIMITS.get("max_rank", 64))
    MAX_ARITY = int(_LIMITS.get("max_arity", 12))
    MAX_NEWTON_ITERATIONS = int(_LIMITS.get("max_newton_iterations", 64))
    MAX_LATTICE_RANK = int(_LIMITS.get("max_lattice_rank", 7))
    CAYLEY_TOLERANCE = float(_TOLERANCES.get("cayley", 1e-9))
