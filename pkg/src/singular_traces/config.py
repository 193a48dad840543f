"""
Configuration management for the singular traces toolkit.
"""

import os
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from .exceptions import ConfigurationError
from .logging_config import get_logger

logger = get_logger(__name__)

DEFAULT_SCHEDULE = "0.1,0.05,0.025,0.0125"
MIN_PRECISION = 20
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _parse_schedule(text: str) -> List[float]:
    """Parse a comma separated list of t values."""
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigurationError(
            f"Invalid t-schedule '{text}': {e}", "INVALID_SCHEDULE"
        ) from e


class Config:
    """Configuration class for the singular traces toolkit.

    Values come from the environment (optionally seeded from a .env file);
    command line flags are layered on top with :meth:`with_overrides`.
    """

    def __init__(self, config_path: Optional[str] = None):
        """Initialize configuration.

        Args:
            config_path: Path to a .env file. If None, uses default locations.
        """
        if config_path:
            load_dotenv(config_path)
        else:
            load_dotenv()  # .env in current directory
            load_dotenv(Path.home() / ".singular_traces" / ".env")  # User config

        # Numerics
        self.precision = int(os.getenv("TRACE_PRECISION", "50"))
        self.jobs = int(os.getenv("TRACE_JOBS", "1"))
        self.dmax = int(os.getenv("TRACE_DMAX", "400"))
        self.t_schedule = _parse_schedule(os.getenv("TRACE_SCHEDULE", DEFAULT_SCHEDULE))
        self.growth_rate = float(os.getenv("TRACE_GROWTH_RATE", "3.141592653589793"))
        self.zero_height = float(os.getenv("TRACE_ZERO_HEIGHT", "6"))
        self.zero_method = os.getenv("TRACE_ZERO_METHOD", "fourier")

        # Cusp expansion sampling
        self.cusp_height = float(os.getenv("TRACE_CUSP_HEIGHT", "0.5"))
        self.cusp_samples = int(os.getenv("TRACE_CUSP_SAMPLES", "1024"))

        # Storage
        self.cache_dir = os.getenv("TRACE_CACHE_DIR", "./data/trace_cache")
        self.presets_file = os.getenv("TRACE_PRESETS_FILE", "config/experiments.yaml")

        # Logging
        self.log_level = os.getenv("TRACE_LOG_LEVEL", "INFO")
        self.log_file = os.getenv("TRACE_LOG_FILE")

        self._validate()

    def _validate(self) -> None:
        """Validate configuration settings."""
        logger.debug("Validating configuration settings")

        if self.precision < MIN_PRECISION:
            raise ConfigurationError(
                f"Precision must be at least {MIN_PRECISION} digits, got {self.precision}",
                "INVALID_PRECISION",
            )
        if self.dmax < 1:
            raise ConfigurationError(
                f"dmax must be at least 1, got {self.dmax}", "INVALID_DMAX"
            )
        if self.jobs < 1:
            raise ConfigurationError(
                f"jobs must be at least 1, got {self.jobs}", "INVALID_JOBS"
            )
        if not self.t_schedule or any(t <= 0 for t in self.t_schedule):
            raise ConfigurationError(
                "t-schedule must be a non-empty list of positive values",
                "INVALID_SCHEDULE",
            )
        if any(b >= a for a, b in zip(self.t_schedule, self.t_schedule[1:])):
            raise ConfigurationError(
                f"t-schedule must be strictly decreasing: {self.t_schedule}",
                "INVALID_SCHEDULE",
            )
        samples = self.cusp_samples
        if samples < 4 or samples & (samples - 1):
            raise ConfigurationError(
                f"Cusp sample count must be a power of two >= 4, got {samples}",
                "INVALID_SAMPLES",
            )
        if self.zero_method not in ("fourier", "quadrature"):
            raise ConfigurationError(
                f"Tr_0 method must be fourier or quadrature, got {self.zero_method}",
                "INVALID_ZERO_METHOD",
            )
        if str(self.log_level).upper() not in LOG_LEVELS:
            raise ConfigurationError(
                f"Unknown log level '{self.log_level}'", "INVALID_LOG_LEVEL"
            )
        if self.cusp_height <= 0 or self.zero_height <= 1:
            raise ConfigurationError(
                "Sampling heights must be positive and the truncation height above 1",
                "INVALID_HEIGHT",
            )

        logger.debug("Configuration validation successful")

    def with_overrides(self, **overrides: Any) -> "Config":
        """Return a copy with the non-None overrides applied and re-validated.

        Args:
            **overrides: Attribute names mapped to new values. ``t_schedule`` may
                be given as a comma separated string.
        """
        clone = object.__new__(Config)
        clone.__dict__.update(self.__dict__)
        for key, value in overrides.items():
            if value is None:
                continue
            if not hasattr(self, key):
                raise ConfigurationError(f"Unknown setting '{key}'", "UNKNOWN_SETTING")
            if key == "t_schedule" and isinstance(value, str):
                value = _parse_schedule(value)
            setattr(clone, key, value)
        clone._validate()
        return clone

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        return {
            "precision": self.precision,
            "jobs": self.jobs,
            "dmax": self.dmax,
            "t_schedule": list(self.t_schedule),
            "growth_rate": self.growth_rate,
            "zero_height": self.zero_height,
            "zero_method": self.zero_method,
            "cusp_height": self.cusp_height,
            "cusp_samples": self.cusp_samples,
            "cache_dir": self.cache_dir,
            "presets_file": self.presets_file,
            "log_level": self.log_level,
            "log_file": self.log_file,
        }
