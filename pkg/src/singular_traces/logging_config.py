"""
Logging configuration for the singular traces toolkit.

Records go to stderr; stdout is reserved for JSON output of the CLI.
"""

import logging
import sys
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Optional

DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(
    level: str = "INFO",
    log_file: Optional[str] = None,
    format_string: Optional[str] = None,
) -> None:
    """
    Set up logging for a CLI run.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional log file; its directory is created if needed
        format_string: Optional custom format string
    """
    handlers: list = [logging.StreamHandler(sys.stderr)]
    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_path))

    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format=format_string or DEFAULT_FORMAT,
        handlers=handlers,
        force=True,
    )


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger instance for the given name.

    Args:
        name: Logger name (usually __name__)

    Returns:
        Logger instance
    """
    return logging.getLogger(name)


@contextmanager
def timed(logger: logging.Logger, message: str, *args: Any) -> Iterator[None]:
    """Log ``message % args`` at INFO with the elapsed wall time once the block ends."""
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    logger.info(message + " in %.2f s", *args, elapsed)
