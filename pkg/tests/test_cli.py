"""
Tests for CLI functionality.
"""

import json
import os
from unittest.mock import patch

import pytest
from click.testing import CliRunner
from mpmath import mp

from src.singular_traces.cli import cli, exit_code_for
from src.singular_traces.exceptions import (
    ConfigurationError,
    DetectionError,
    InsufficientDataError,
    PoleError,
)
from src.singular_traces.lreg import CuspExpansion
from src.singular_traces.arith import Matrix2Z
from src.singular_traces.modeval import get_form
from src.singular_traces.radial import RadialReport
from src.singular_traces.traces import TraceTable, TraceValue


@pytest.fixture(autouse=True)
def quiet_logging(clean_environment):
    """No basicConfig side effects and no TRACE_* leakage from the shell."""
    with patch("src.singular_traces.cli.setup_logging") as mocked:
        yield mocked


def small_table() -> TraceTable:
    table = TraceTable("j1", 30)
    for d, value in [(-8, 7256), (-7, -4119), (-4, 492), (-3, -248), (0, 4)]:
        table.add(d, TraceValue(mp.mpc(value), mp.mpf(0)))
    return table


def fixed_report(variant: str, extrapolated: object, rhs: object) -> RadialReport:
    schedule = [mp.mpf(t) for t in (0.4, 0.2, 0.1)]
    return RadialReport(
        form="j1", a=1, c=4, variant=variant, c_r=mp.mpc(1, 1), schedule=schedule,
        lhs=[mp.mpc(extrapolated)] * 3, lhs_errors=[mp.mpf(10) ** -12] * 3,
        extrapolated=mp.mpc(extrapolated), rhs=mp.mpc(rhs),
        residual=abs(mp.mpc(extrapolated) - rhs), cutoff=40,
    )


class TestCLI:
    """Test CLI functionality."""

    def setup_method(self) -> None:
        """Set up test fixtures."""
        self.runner = CliRunner()

    def run(self, temp_dir, *args: str):
        base = ["--prec", "30", "--cache-dir", str(temp_dir / "cache"), "--out", str(temp_dir / "out.json")]
        return self.runner.invoke(cli, base + list(args))

    def output(self, temp_dir) -> dict:
        return json.loads((temp_dir / "out.json").read_text())

    def test_main_command_help(self) -> None:
        """Test main command help."""
        result = self.runner.invoke(cli, ["--help"])
        assert result.exit_code == 0
        assert "Singular Traces" in result.output
        for command in ("trace", "lreg", "funeq", "cusp-expand", "radial", "period-check"):
            assert command in result.output

    def test_invalid_precision_from_environment(self, temp_dir) -> None:
        """A configuration error exits with code 2 before any work is done."""
        with patch.dict(os.environ, {"TRACE_PRECISION": "5"}):
            result = self.runner.invoke(cli, ["trace", "--d", "-3"])
        assert result.exit_code == 2
        assert "INVALID_PRECISION" in result.output

    def test_single_trace(self, temp_dir) -> None:
        """Tr_{-3}(j1) = -248."""
        result = self.run(temp_dir, "trace", "--d", "-3")
        assert result.exit_code == 0, result.output
        payload = self.output(temp_dir)
        assert payload["form"] == "j1"
        assert payload["d"] == -3
        assert abs(float(payload["re"]) + 248) < 1e-10

    @pytest.mark.parametrize("args", [[], ["--d", "-3", "--range", "-8..0"]])
    def test_trace_needs_one_selector(self, temp_dir, args) -> None:
        """Exactly one of --d and --range."""
        result = self.run(temp_dir, "trace", *args)
        assert result.exit_code == 2
        assert "exactly one" in result.output

    def test_trace_range_uses_cache(self, temp_dir) -> None:
        """A range is computed once and then served from the cache."""
        with patch("src.singular_traces.cli.build_table", return_value=small_table()) as build:
            result = self.run(temp_dir, "trace", "--range", "-8..0")
        assert result.exit_code == 0, result.output
        build.assert_called_once()
        assert list((temp_dir / "cache").glob("j1_p30_-8_0.json"))

        with patch("src.singular_traces.cli.build_table", side_effect=AssertionError) as build:
            result = self.run(temp_dir, "trace", "--range", "-4..0")
        assert result.exit_code == 0, result.output
        build.assert_not_called()
        assert [entry["d"] for entry in self.output(temp_dir)["traces"]] == [-4, -3, 0]

    def test_lreg_theta(self, temp_dir) -> None:
        """An L-value with its cutoffs."""
        result = self.run(temp_dir, "lreg", "--form", "theta", "--r", "1/4", "--s", "0.25")
        assert result.exit_code == 0, result.output
        payload = self.output(temp_dir)
        assert payload["r"] == "1/4"
        assert payload["gamma"] == [1, 0, 4, 1]
        assert payload["cutoffs"]["infinity"] > 0
        assert set(payload["value"]) == {"re", "im"}

    def test_lreg_missing_arguments(self, temp_dir) -> None:
        """Without --query all of --form, --r and --s are required."""
        result = self.run(temp_dir, "lreg", "--form", "theta")
        assert result.exit_code == 2

    def test_lreg_pole(self, temp_dir) -> None:
        """g1 has a constant term, so s = 0 is a pole."""
        result = self.run(temp_dir, "lreg", "--form", "g1", "--r", "1/4", "--s", "0")
        assert result.exit_code == 2

    def test_lreg_query_with_short_expansion(self, temp_dir) -> None:
        """A supplied expansion that is too short exits with code 3."""
        theta = get_form("theta")
        expansion = CuspExpansion.from_multiplier(theta, Matrix2Z(1, 0, 4, 1))
        query = temp_dir / "query.json"
        query.write_text(json.dumps({"form": "theta", "s": "0.5", "expansion": expansion.to_dict()}))
        result = self.run(temp_dir, "lreg", "--query", str(query))
        assert result.exit_code == 3
        assert "Required" in result.output

    def test_funeq_from_preset(self, temp_dir, monkeypatch) -> None:
        """Presets supply forms, gamma and s."""
        presets = temp_dir / "experiments.yaml"
        presets.write_text(
            "theta-check:\n"
            "  command: funeq\n"
            "  forms: [theta]\n"
            "  gamma: [1, 0, 4, 1]\n"
            "  s: ['0.25']\n"
            "  precision: 30\n"
            "radial-check:\n"
            "  command: radial\n"
            "  forms: [j1]\n"
            "  r: ['1/4']\n"
        )
        monkeypatch.setenv("TRACE_PRESETS_FILE", str(presets))
        result = self.run(temp_dir, "funeq", "--preset", "theta-check")
        assert result.exit_code == 0, result.output
        results = self.output(temp_dir)["results"]
        assert len(results) == 1
        assert float(results[0]["abs_residual"]) < 1e-10

        result = self.run(temp_dir, "funeq", "--preset", "radial-check")
        assert result.exit_code == 2

    def test_cusp_expand(self, temp_dir) -> None:
        """theta at the cusp 0 has width 4."""
        result = self.run(
            temp_dir, "cusp-expand", "--form", "theta", "--gamma", "0,-1,1,0",
            "--samples", "256",
        )
        assert result.exit_code == 0, result.output
        payload = self.output(temp_dir)
        assert payload["lambda"] == 4
        assert float(payload["resynthesis_error"]) < 1e-10

    def test_radial(self, temp_dir, synthetic_positive_table) -> None:
        """Radial runs report one entry per cusp."""
        with patch("src.singular_traces.cli.build_table", return_value=synthetic_positive_table), \
             patch("src.singular_traces.radial.radial_rhs", return_value=mp.mpc(5)):
            result = self.run(
                temp_dir, "radial", "--r", "1/4", "--r", "3/4", "--dmax", "40",
                "--schedule", "0.4,0.2,0.1", "--no-cache",
            )
        assert result.exit_code == 0, result.output
        payload = self.output(temp_dir)
        assert payload["dmax"] == 40
        assert [report["r"] for report in payload["reports"]] == ["1/4", "3/4"]

    def test_radial_closed_shadow_needs_j1(self, temp_dir, synthetic_positive_table) -> None:
        """Only j1 has a closed form for its shadow."""
        synthetic_positive_table.form = "j2"
        with patch("src.singular_traces.cli.build_table", return_value=synthetic_positive_table):
            result = self.run(
                temp_dir, "radial", "--form", "j2", "--r", "1/4", "--dmax", "40",
                "--schedule", "0.4,0.2,0.1", "--shadow", "closed", "--no-cache",
            )
        assert result.exit_code == 2

    def test_radial_tail_abort(self, temp_dir, synthetic_positive_table) -> None:
        """Tails above 10% of |rhs| exit with code 3."""
        with patch("src.singular_traces.cli.build_table", return_value=synthetic_positive_table), \
             patch("src.singular_traces.radial.radial_rhs", return_value=mp.mpc(5)):
            result = self.run(
                temp_dir, "radial", "--r", "1/4", "--dmax", "40",
                "--schedule", "0.1,0.01", "--no-cache",
            )
        assert result.exit_code == 3

    def test_period_check(self, temp_dir, synthetic_positive_table) -> None:
        """Both limits are reported with their gap."""
        with patch("src.singular_traces.cli.build_table", return_value=synthetic_positive_table), \
             patch("src.singular_traces.radial.radial_rhs", return_value=mp.mpc(5)):
            result = self.run(
                temp_dir, "period-check", "--gamma", "1,0,4,1", "--dmax", "40",
                "--schedule", "0.4,0.2,0.1", "--no-cache",
            )
        assert result.exit_code == 0, result.output
        payload = self.output(temp_dir)
        assert payload["comparison"]["variant"] == "period"
        assert float(payload["rhs_gap"]) == 0
        assert isinstance(payload["consistent"], bool)
        assert float(payload["lhs_tolerance"]) >= 0

    @pytest.mark.parametrize(
        "radial,period,lhs_ok,rhs_ok",
        [
            ((6, 5), (7, 5), False, True),
            ((6, 5), (6, 5), True, True),
            ((6, 5), (6, 5.5), True, False),
        ],
    )
    def test_period_check_uses_error_bounds_only(
        self, temp_dir, synthetic_positive_table, radial, period, lhs_ok, rhs_ok
    ) -> None:
        """A large residual of the radial limit does not widen the tolerance of either gap."""
        with patch("src.singular_traces.cli.build_table", return_value=synthetic_positive_table), \
             patch("src.singular_traces.cli.radial_residual",
                   return_value=fixed_report("radial", *radial)), \
             patch("src.singular_traces.cli.period_limit_residual",
                   return_value=fixed_report("period", *period)):
            result = self.run(
                temp_dir, "period-check", "--gamma", "1,0,4,1", "--dmax", "40",
                "--schedule", "0.4,0.2,0.1", "--no-cache",
            )
        assert result.exit_code == 0, result.output
        payload = self.output(temp_dir)
        assert payload["lhs_consistent"] is lhs_ok
        assert payload["rhs_consistent"] is rhs_ok
        assert payload["consistent"] is (lhs_ok and rhs_ok)
        assert float(payload["lhs_tolerance"]) < 1e-10


class TestExitCodes:
    """Mapping of errors to exit codes."""

    @pytest.mark.parametrize(
        "error,code",
        [
            (ConfigurationError("bad"), 2),
            (PoleError("pole"), 2),
            (InsufficientDataError("short"), 3),
            (DetectionError("none"), 3),
        ],
    )
    def test_known_errors(self, error, code: int) -> None:
        """Argument errors give 2, numerical failures give 3."""
        assert exit_code_for(error) == code

    def test_other_errors_propagate(self) -> None:
        """Anything else is re-raised."""
        with pytest.raises(ValueError):
            exit_code_for(ValueError("bug"))
