"""
Tests for configuration management.
"""

import os
from unittest.mock import patch

import pytest

from src.singular_traces.config import DEFAULT_SCHEDULE, Config
from src.singular_traces.exceptions import ConfigurationError


@pytest.mark.usefixtures("clean_environment")
class TestConfig:
    """Test configuration functionality."""

    def test_config_defaults(self) -> None:
        """Defaults without any environment."""
        config = Config()
        assert config.precision == 50
        assert config.jobs == 1
        assert config.dmax == 400
        assert config.t_schedule == [float(t) for t in DEFAULT_SCHEDULE.split(",")]
        assert config.zero_method == "fourier"
        assert config.cusp_samples == 1024
        assert config.cache_dir == "./data/trace_cache"
        assert config.log_file is None

    def test_environment_overrides(self) -> None:
        """TRACE_* variables are read at construction."""
        env = {
            "TRACE_PRECISION": "80",
            "TRACE_JOBS": "4",
            "TRACE_SCHEDULE": "0.2, 0.1",
            "TRACE_LOG_LEVEL": "debug",
        }
        with patch.dict(os.environ, env):
            config = Config()
        assert config.precision == 80
        assert config.jobs == 4
        assert config.t_schedule == [0.2, 0.1]
        assert config.log_level == "debug"

    def test_config_with_env_file(self, temp_dir) -> None:
        """An explicit .env file is passed to load_dotenv."""
        env_file = temp_dir / "trace.env"
        env_file.write_text("TRACE_DMAX=120\n")
        with patch("src.singular_traces.config.load_dotenv") as mock_load_dotenv:
            Config(config_path=str(env_file))
        mock_load_dotenv.assert_called_once_with(str(env_file))

    @pytest.mark.parametrize(
        "variable,value,code",
        [
            ("TRACE_PRECISION", "10", "INVALID_PRECISION"),
            ("TRACE_DMAX", "0", "INVALID_DMAX"),
            ("TRACE_JOBS", "0", "INVALID_JOBS"),
            ("TRACE_SCHEDULE", "0.1,0.2", "INVALID_SCHEDULE"),
            ("TRACE_SCHEDULE", "0.1,-0.05", "INVALID_SCHEDULE"),
            ("TRACE_SCHEDULE", "fast", "INVALID_SCHEDULE"),
            ("TRACE_CUSP_SAMPLES", "1000", "INVALID_SAMPLES"),
            ("TRACE_ZERO_METHOD", "guess", "INVALID_ZERO_METHOD"),
            ("TRACE_LOG_LEVEL", "LOUD", "INVALID_LOG_LEVEL"),
            ("TRACE_ZERO_HEIGHT", "0.5", "INVALID_HEIGHT"),
        ],
    )
    def test_config_validation(self, variable: str, value: str, code: str) -> None:
        """Invalid settings raise ConfigurationError with a specific code."""
        with patch.dict(os.environ, {variable: value}):
            with pytest.raises(ConfigurationError) as e:
                Config()
        assert e.value.error_code == code

    def test_with_overrides(self) -> None:
        """Overrides produce a validated copy and skip None values."""
        config = Config()
        changed = config.with_overrides(precision=30, jobs=None, t_schedule="0.5,0.25")
        assert changed.precision == 30
        assert changed.jobs == config.jobs
        assert changed.t_schedule == [0.5, 0.25]
        assert config.precision == 50

    def test_with_overrides_validates(self) -> None:
        """Overrides go through the same checks."""
        config = Config()
        with pytest.raises(ConfigurationError) as e:
            config.with_overrides(precision=5)
        assert e.value.error_code == "INVALID_PRECISION"
        with pytest.raises(ConfigurationError) as e:
            config.with_overrides(colour="blue")
        assert e.value.error_code == "UNKNOWN_SETTING"

    def test_config_to_dict(self) -> None:
        """Test config to dictionary conversion."""
        config_dict = Config().to_dict()
        assert isinstance(config_dict, dict)
        for key in ("precision", "jobs", "dmax", "t_schedule", "cache_dir", "log_level"):
            assert key in config_dict
        assert config_dict["presets_file"] == "config/experiments.yaml"
