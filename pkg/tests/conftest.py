"""
Pytest configuration and fixtures for singular traces tests.
"""
import os
import tempfile
from pathlib import Path
from typing import Generator
from unittest.mock import patch

import pytest
from mpmath import mp

from src.singular_traces.traces import TraceTable, TraceValue, build_table


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Create a temporary directory for testing."""
    with tempfile.TemporaryDirectory() as tmp_dir:
        yield Path(tmp_dir)


@pytest.fixture(autouse=True)
def working_precision() -> Generator[int, None, None]:
    """Run every test at 30 digits unless it asks for more."""
    with mp.workdps(30):
        yield 30


@pytest.fixture
def clean_environment() -> Generator[None, None, None]:
    """Environment without TRACE_* variables and without .env loading."""
    kept = {k: v for k, v in os.environ.items() if not k.startswith("TRACE_")}
    with patch.dict(os.environ, kept, clear=True), \
         patch("src.singular_traces.config.load_dotenv"):
        yield


def _exact(value: int) -> TraceValue:
    return TraceValue(mp.mpc(value), mp.mpf(0))


@pytest.fixture
def j1_shadow_table() -> TraceTable:
    """Tr_d(j1) for -60 <= d <= 0 computed from CM values, with Tr_0 and Tr^c_1."""
    return build_table("j1", -60, 0, precision=30)


@pytest.fixture
def synthetic_positive_table() -> TraceTable:
    """Tr_0 = 4 and Tr_d = 1 for 0 < d <= 40 (d = 0, 1 mod 4)."""
    table = TraceTable("j1", 30)
    table.add(0, _exact(4))
    for d in range(1, 41):
        if d % 4 in (0, 1):
            table.add(d, _exact(1))
    table.comp = {1: mp.mpc(2)}
    return table


# Test markers
def pytest_configure(config):
    """Configure pytest markers."""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )
    config.addinivalue_line(
        "markers", "integration: marks tests as integration tests"
    )
    config.addinivalue_line(
        "markers", "unit: marks tests as unit tests"
    )
