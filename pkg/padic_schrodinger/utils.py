"""
Utility functions and helpers.
"""

import hashlib
import json
import logging
from datetime import datetime
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Union

from rich.console import Console
from rich.logging import RichHandler

DECIMAL_DIGITS = 15


def compute_file_hash(file_path: Path) -> str:
    """
    Compute SHA256 hash of a file.

    Args:
        file_path: Path to file

    Returns:
        Hexadecimal hash string
    """
    hash_obj = hashlib.sha256()

    with open(file_path, "rb") as f:
        while chunk := f.read(8192):
            hash_obj.update(chunk)

    return hash_obj.hexdigest()


def generate_run_id() -> str:
    """
    Generate a unique run ID based on timestamp.

    Returns:
        Run ID in format YYYYMMDD_HHMMSS_ffffff
    """
    return datetime.utcnow().strftime("%Y%m%d_%H%M%S_%f")


def format_duration(seconds: float) -> str:
    """
    Format duration in human-readable format.

    Args:
        seconds: Duration in seconds

    Returns:
        Formatted string (e.g., "3m 42s")
    """
    if seconds < 60:
        return f"{seconds:.1f}s"

    minutes = int(seconds // 60)
    remaining_seconds = int(seconds % 60)

    if minutes < 60:
        return f"{minutes}m {remaining_seconds}s"

    hours = int(minutes // 60)
    remaining_minutes = int(minutes % 60)

    return f"{hours}h {remaining_minutes}m {remaining_seconds}s"


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """
    Parse an exact rational from "a/b", an integer or a finite decimal.

    Decimals and scientific notation convert exactly ("1e-12" is 1/10^12).

    Args:
        text: Value to parse

    Returns:
        Exact Fraction

    Raises:
        ValueError: If the text is not a finite rational
    """
    if isinstance(text, (int, Fraction)) and not isinstance(text, bool):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"not an exact rational: {text!r}") from e


def render_rational(q: Fraction) -> str:
    """Render as "a/b", or "a" for integers."""
    return str(Fraction(q))


def render_decimal(q: Fraction, digits: int = DECIMAL_DIGITS) -> str:
    """
    Render with `digits` significant digits.

    Trailing zeros of the mantissa are dropped, so parsing the output and
    rendering it again gives the same text.

    Example:
        >>> render_decimal(Fraction(25, 31))
        '0.806451612903226'
    """
    q = Fraction(q)
    with localcontext() as ctx:
        ctx.prec = digits
        value = Decimal(q.numerator) / Decimal(q.denominator)
        mantissa, marker, exponent = format(value, f".{digits}g").partition("e")
    if "." in mantissa:
        mantissa = mantissa.rstrip("0").rstrip(".")
    return mantissa + marker + exponent


def setup_logging(
    log_level: str = "WARNING",
    log_file: Optional[Path] = None,
    enable_color: bool = True,
) -> None:
    """
    Set up logging configuration.

    Console output goes to stderr so that stdout carries only results.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
        log_file: Path to log file (optional)
        enable_color: Enable colored console output
    """
    logger = logging.getLogger()
    level = getattr(logging, log_level.upper())
    logger.setLevel(logging.DEBUG if log_file else level)

    # Clear existing handlers
    logger.handlers.clear()

    console_handler: logging.Handler
    if enable_color:
        console_handler = RichHandler(console=Console(stderr=True), show_path=False)
        console_handler.setFormatter(logging.Formatter("%(message)s"))
    else:
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(
            logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
        )
    console_handler.setLevel(level)
    logger.addHandler(console_handler)

    # File handler (if specified)
    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(logging.DEBUG)  # Always DEBUG for file
        file_formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
        file_handler.setFormatter(file_formatter)
        logger.addHandler(file_handler)


def load_config(config_path: Path) -> Dict[str, Any]:
    """
    Load configuration from JSON file.

    Args:
        config_path: Path to config file

    Returns:
        Configuration dictionary with defaults
    """
    defaults: Dict[str, Any] = {
        "state_db_path": ".state/sweeps.db",
        "log_directory": None,
        "log_level": "WARNING",
        "enable_color": True,
        "truncation": 60,
        "solve_tolerance": "1e-12",
        "tail_tolerance": "1e-30",
        "max_shell_terms": 5000,
        "divergence_window": 5,
        "scan_points": 0,
        "workers": 1,
    }

    if not config_path.exists():
        return defaults

    try:
        with open(config_path, "r") as f:
            user_config = json.load(f)
            defaults.update(user_config)
            return defaults
    except Exception:
        # Return defaults if config loading fails
        return defaults
