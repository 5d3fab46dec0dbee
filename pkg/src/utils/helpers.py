"""
Helper utilities for the bounds toolkit.
"""

import os
import logging
from pathlib import Path
from typing import Dict, Any, Tuple

import numpy as np
from scipy.stats import binomtest

from src.config.settings import settings
from src.utils.errors import OutputError

logger = logging.getLogger(__name__)


def setup_logging(level: str = "INFO", log_file: str = None) -> None:
    """
    Setup logging configuration.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR)
        log_file: Optional log file; defaults to settings.log_file
    """
    handlers = [logging.StreamHandler()]
    log_file = log_file if log_file is not None else settings.log_file
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def derive_seed(master_seed: int, *keys: int) -> int:
    """
    Derive a child seed from a master seed and a tuple of nonnegative keys.

    The derivation is counter-based, so a child depends only on its keys and
    not on how many other children were derived before it.
    """
    sequence = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def wilson_interval(successes: int, trials: int, confidence_level: float = 0.99) -> Tuple[float, float]:
    """
    Wilson score interval for a binomial proportion.

    Returns:
        (ci_low, ci_high), widened if needed to contain successes / trials
    """
    ci = binomtest(int(successes), int(trials)).proportion_ci(
        confidence_level=confidence_level, method="wilson"
    )
    value = successes / trials
    return max(0.0, min(float(ci.low), value)), min(1.0, max(float(ci.high), value))


def ensure_parent(path: str) -> Path:
    """Create the parent directory of an output path."""
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        logger.error(f"Cannot create output directory for {path}: {e}")
        raise OutputError(f"cannot create output directory for {path}: {e}") from e
    return target


def write_report(path: str, text: str) -> str:
    """
    Write a text report.

    Args:
        path: Destination file
        text: Report body

    Returns:
        Path where the report was saved
    """
    target = ensure_parent(path)
    try:
        with open(target, 'w', encoding='utf-8') as f:
            f.write(text)
        logger.info(f"Saved report to {target}")
        return str(target)

    except OSError as e:
        logger.error(f"Error saving report: {e}")
        raise OutputError(f"cannot write {path}: {e}") from e


def validate_environment() -> Dict[str, Any]:
    """
    Validate the environment setup.

    Returns:
        Dictionary with validation results
    """
    validation_results = {
        "environment_valid": True,
        "missing_requirements": [],
        "warnings": []
    }

    if not settings.validate():
        validation_results["environment_valid"] = False
        validation_results["missing_requirements"].append("valid default settings")

    for module in ("numpy", "scipy", "pandas", "dotenv", "tqdm"):
        try:
            __import__(module)
        except ImportError:
            validation_results["environment_valid"] = False
            validation_results["missing_requirements"].append(module)

    output_dir = settings.output_dir or settings.results_path
    if not os.path.exists(output_dir):
        try:
            os.makedirs(output_dir, exist_ok=True)
            validation_results["warnings"].append(f"Created directory: {output_dir}")
        except OSError:
            validation_results["environment_valid"] = False
            validation_results["missing_requirements"].append(f"Directory: {output_dir}")

    # Check file permissions
    try:
        test_file = os.path.join(output_dir, "test.txt")
        with open(test_file, 'w') as f:
            f.write("test")
        os.remove(test_file)
    except OSError:
        validation_results["environment_valid"] = False
        validation_results["missing_requirements"].append(f"Write permissions: {output_dir}")

    return validation_results
