#!/usr/bin/env python3
"""
Command line interface for the singular traces toolkit.

JSON results go to stdout (or --out); progress, summaries and errors go to
stderr.
"""

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import click
from mpmath import mp
from rich.console import Console
from rich.table import Table

from .arith import Matrix2Z
from .cache import TraceCache
from .config import Config
from .cuspexp import expand_at_cusp, resynthesis_error
from .exceptions import (
    ConfigurationError,
    InvalidArgumentError,
    NumericalFailureError,
    SingularTracesError,
    UnsupportedInputError,
)
from .logging_config import get_logger, setup_logging
from .lreg import CuspExpansion, LregQuery, lreg_cutoffs, lreg_eval, lreg_funeq_residual
from .modeval import FormSpec, get_form
from .presets import ExperimentPreset, get_preset
from .radial import (
    RadialReport,
    period_limit_residual,
    radial_general_residual,
    radial_residual,
)
from .serialization import (
    complex_dict,
    dec,
    dump_json,
    load_json,
    parse_complex,
    parse_matrix,
    parse_range,
    parse_rational,
)
from .traces import TraceTable, build_table, trace, w_form

logger = get_logger(__name__)

console = Console(stderr=True)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def exit_code_for(error: BaseException) -> int:
    """Map the exception hierarchy to process exit codes."""
    if isinstance(error, (InvalidArgumentError, ConfigurationError)):
        return EXIT_INVALID
    if isinstance(error, NumericalFailureError):
        return EXIT_NUMERICAL
    raise error


@dataclass
class RunState:
    """What the group callback hands to every subcommand."""

    config: Config
    out: Optional[str]
    precision_given: bool

    def with_preset(self, preset: Optional[ExperimentPreset]) -> Config:
        """Preset precision applies unless --prec was given explicitly."""
        if preset is None or preset.precision is None or self.precision_given:
            return self.config
        return self.config.with_overrides(precision=preset.precision)

    def emit(self, payload: Any) -> None:
        dump_json(payload, self.out)
        if self.out:
            console.print(f"[green]Wrote {self.out}[/green]")


def handle_errors(func: Callable[..., None]) -> Callable[..., None]:
    """Run a subcommand and turn package errors into exit codes 2 and 3."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> None:
        ctx = click.get_current_context()
        try:
            func(*args, **kwargs)
        except SingularTracesError as e:
            code = exit_code_for(e)
            console.print(f"[red]Error: {e}[/red]")
            required = getattr(e, "required", None)
            if required is not None:
                console.print(f"[yellow]Required: {required}[/yellow]")
            logger.error("%s failed: %s", ctx.info_name, e)
            ctx.exit(code)

    return wrapper


def _state() -> RunState:
    return click.get_current_context().find_object(RunState)


def _load_table(
    cfg: Config, label: str, lo: int, hi: int, use_cache: bool = True
) -> TraceTable:
    """Trace table for lo..hi, from the cache when possible."""
    cache = TraceCache(cfg.cache_dir)
    if use_cache:
        table = cache.load_covering(label, cfg.precision, lo, hi)
        if table is not None:
            return table
    with console.status(f"[bold green]Computing traces of {label} on {lo}..{hi}..."):
        table = build_table(
            label,
            lo,
            hi,
            precision=cfg.precision,
            jobs=cfg.jobs,
            zero_height=cfg.zero_height,
            zero_method=cfg.zero_method,
            growth_rate=mp.mpf(cfg.growth_rate),
        )
    if use_cache:
        cache.store(table, lo, hi)
    return table


def _shadow_label(label: str) -> Optional[str]:
    if label.startswith("W(") and label.endswith(")"):
        return label[2:-1]
    return None


def resolve_form(cfg: Config, label: str, use_cache: bool = True) -> FormSpec:
    """Registered form, or W(f) assembled from the traces Tr_d(f), -dmax <= d <= 0."""
    inner = _shadow_label(label)
    if inner is None:
        return get_form(label)
    table = _load_table(cfg, inner, -cfg.dmax, 0, use_cache)
    return w_form(table)


def _shadow_for(table: TraceTable, source: str) -> Optional[FormSpec]:
    """None lets the radial code assemble W(f) from the table; closed uses g1 for j1."""
    if source == "table":
        return None
    if table.form != "j1":
        raise UnsupportedInputError(
            f"A closed form for W({table.form}) is not available; use --shadow table"
        )
    return get_form("g1")


def _fraction_text(r: Fraction) -> str:
    return f"{r.numerator}/{r.denominator}"


def _radial_summary(reports: Sequence[RadialReport]) -> None:
    table = Table(title="Radial limits")
    table.add_column("r")
    table.add_column("variant")
    table.add_column("extrapolated LHS")
    table.add_column("RHS")
    table.add_column("residual", justify="right")
    table.add_column("trend")
    for report in reports:
        table.add_row(
            f"{report.a}/{report.c}",
            report.variant,
            mp.nstr(report.extrapolated, 12),
            mp.nstr(report.rhs, 12),
            mp.nstr(report.residual, 5),
            report.diagnostics.get("trend", ""),
        )
    console.print(table)


@click.group()
@click.option("--prec", type=int, default=None, help="Working precision in decimal digits")
@click.option("--jobs", type=int, default=None, help="Worker processes (1 = no pool)")
@click.option("--out", "out", type=click.Path(dir_okay=False), default=None,
              help="Write JSON here instead of stdout")
@click.option("--cache-dir", default=None, help="Directory of cached trace tables")
@click.option("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
@click.option("--config", "-c", "config_path", default=None, help="Path to a .env file")
@click.pass_context
def cli(
    ctx: click.Context,
    prec: Optional[int],
    jobs: Optional[int],
    out: Optional[str],
    cache_dir: Optional[str],
    log_level: Optional[str],
    config_path: Optional[str],
) -> None:
    """Singular Traces - modular traces, regularized L-functions and radial limits."""
    try:
        cfg = Config(config_path=config_path).with_overrides(
            precision=prec, jobs=jobs, cache_dir=cache_dir, log_level=log_level
        )
    except ConfigurationError as e:
        console.print(f"[red]Configuration error ({e.error_code}): {e}[/red]")
        ctx.exit(EXIT_INVALID)
    setup_logging(cfg.log_level, cfg.log_file)
    ctx.obj = RunState(cfg, out, prec is not None)


@cli.command("trace")
@click.option("--form", "label", default="j1", show_default=True, help="Form label")
@click.option("--d", "d", type=int, default=None, help="Single discriminant")
@click.option("--range", "index_range", default=None, help="Inclusive range lo..hi")
@click.option("--from-cache/--no-cache", "use_cache", default=True,
              help="Reuse and store cached tables")
@handle_errors
def trace_command(
    label: str, d: Optional[int], index_range: Optional[str], use_cache: bool
) -> None:
    """Modular traces Tr_d(f) for one index or a range."""
    state = _state()
    cfg = state.config
    if (d is None) == (index_range is None):
        raise InvalidArgumentError("Give exactly one of --d and --range")
    with mp.workdps(cfg.precision):
        if d is not None:
            value = trace(get_form(label), d, mp.mpf(cfg.zero_height), cfg.zero_method)
            payload: Dict[str, Any] = value.to_dict(d)
            payload.update({"form": label, "precision": cfg.precision})
            console.print(f"[bold cyan]Tr_{d}({label})[/bold cyan] = {mp.nstr(value.value, 20)}")
        else:
            lo, hi = parse_range(index_range or "")
            table = _load_table(cfg, label, lo, hi, use_cache)
            payload = table.to_dict()
            console.print(f"[bold cyan]{len(table.indices())} traces of {label}[/bold cyan]")
        state.emit(payload)


def _lreg_query_from_file(cfg: Config, path: str) -> LregQuery:
    data = load_json(path)
    if not isinstance(data, dict) or "form" not in data or "s" not in data:
        raise InvalidArgumentError(f"{path} must hold an object with 'form' and 's'")
    g = resolve_form(cfg, str(data["form"]))
    s = parse_complex(data["s"])
    t = mp.mpf(str(data.get("t", "1")))
    if "expansion" in data:
        return LregQuery(g, CuspExpansion.from_dict(data["expansion"]), s, t)
    if "r" not in data:
        raise InvalidArgumentError(f"{path} needs 'r' or 'expansion'")
    a, c = parse_rational(str(data["r"]))
    gamma = parse_matrix(data["gamma"]) if "gamma" in data else None
    return LregQuery.at_rational(g, a, c, s, t, gamma)


@cli.command("lreg")
@click.option("--form", "label", default=None, help="Form label, e.g. theta or W(j1)")
@click.option("--r", "r", default=None, help="Cusp a/c")
@click.option("--s", "s", default=None, help="Complex s, e.g. 0.5 or 1+0.3i")
@click.option("--t", "t", default="1", show_default=True, help="Horocycle parameter t > 0")
@click.option("--gamma", default=None, help="Matrix a,b,c,d with gamma(i*oo) = r")
@click.option("--query", "query_file", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON file describing the query")
@handle_errors
def lreg_command(
    label: Optional[str],
    r: Optional[str],
    s: Optional[str],
    t: str,
    gamma: Optional[str],
    query_file: Optional[str],
) -> None:
    """Regularized twisted L-value L^reg_r(g, s)."""
    state = _state()
    cfg = state.config
    with mp.workdps(cfg.precision):
        if query_file:
            query = _lreg_query_from_file(cfg, query_file)
        else:
            if label is None or r is None or s is None:
                raise InvalidArgumentError("lreg needs --form, --r and --s (or --query)")
            a, c = parse_rational(r)
            query = LregQuery.at_rational(
                resolve_form(cfg, label),
                a,
                c,
                parse_complex(s),
                mp.mpf(t),
                parse_matrix(gamma) if gamma else None,
            )
        value = lreg_eval(query)
        n_inf, n_cusp = lreg_cutoffs(query)
        console.print(
            f"[bold cyan]L^reg_{_fraction_text(query.r)}({query.g.label}, "
            f"{mp.nstr(query.s, 8)})[/bold cyan] = {mp.nstr(value, 20)}"
        )
        state.emit({
            "form": query.g.label,
            "r": _fraction_text(query.r),
            "gamma": list(query.gamma.as_tuple()),
            "s": complex_dict(query.s),
            "t": dec(query.t, 15),
            "precision": cfg.precision,
            "cutoffs": {"infinity": n_inf, "cusp": n_cusp},
            "value": complex_dict(value),
        })


@cli.command("funeq")
@click.option("--form", "labels", multiple=True, help="Form label (repeatable)")
@click.option("--gamma", default=None, help="Matrix a,b,c,d in Gamma_0(4)")
@click.option("--s", "s_values", multiple=True, help="Complex s (repeatable)")
@click.option("--t", "t", default="1", show_default=True, help="Horocycle parameter t > 0")
@click.option("--preset", "preset_name", default=None, help="Named preset from the YAML file")
@handle_errors
def funeq_command(
    labels: Tuple[str, ...],
    gamma: Optional[str],
    s_values: Tuple[str, ...],
    t: str,
    preset_name: Optional[str],
) -> None:
    """Residual of the functional equation of L^reg between a/c and -d/c."""
    state = _state()
    preset = get_preset(preset_name, state.config.presets_file) if preset_name else None
    if preset is not None and preset.command != "funeq":
        raise InvalidArgumentError(f"Preset '{preset.name}' is a {preset.command} preset")
    cfg = state.with_preset(preset)
    forms = list(labels) or (preset.forms if preset else [])
    s_list = list(s_values) or (preset.s if preset else [])
    matrix = parse_matrix(gamma) if gamma else (preset.gamma if preset else None)
    if not forms or not s_list or matrix is None:
        raise InvalidArgumentError("funeq needs --form, --gamma and --s (or --preset)")
    results: List[Dict[str, Any]] = []
    summary = Table(title="Functional equation residuals")
    summary.add_column("form")
    summary.add_column("s")
    summary.add_column("|residual|", justify="right")
    with mp.workdps(cfg.precision):
        for label in forms:
            g = resolve_form(cfg, label)
            for text in s_list:
                s = parse_complex(text)
                residual = lreg_funeq_residual(g, matrix, s, mp.mpf(t))
                results.append({
                    "form": label,
                    "gamma": list(matrix.as_tuple()),
                    "s": complex_dict(s),
                    "residual": complex_dict(residual),
                    "abs_residual": dec(abs(residual), 10),
                })
                summary.add_row(label, mp.nstr(s, 8), mp.nstr(abs(residual), 5))
    console.print(summary)
    state.emit({"precision": cfg.precision, "results": results})


@cli.command("cusp-expand")
@click.option("--form", "label", required=True, help="Form label")
@click.option("--gamma", required=True, help="Matrix a,b,c,d")
@click.option("--height", type=float, default=None, help="Sampling height y0")
@click.option("--samples", type=int, default=None, help="FFT length (power of two)")
@click.option("--count", type=int, default=None, help="Number of coefficients to keep")
@click.option("--principal", type=int, default=2, show_default=True,
              help="Negative exponents to keep")
@handle_errors
def cusp_expand_command(
    label: str,
    gamma: str,
    height: Optional[float],
    samples: Optional[int],
    count: Optional[int],
    principal: int,
) -> None:
    """Fourier expansion of g at the cusp gamma(i*oo)."""
    state = _state()
    cfg = state.config
    with mp.workdps(cfg.precision):
        g = get_form(label)
        y0 = mp.mpf(height if height is not None else cfg.cusp_height)
        expansion = expand_at_cusp(
            g,
            parse_matrix(gamma),
            y0=y0,
            samples=samples or cfg.cusp_samples,
            count=count,
            principal=principal,
            jobs=cfg.jobs,
        )
        payload = expansion.to_dict()
        payload.update({
            "form": label,
            "precision": cfg.precision,
            "resynthesis_error": dec(resynthesis_error(expansion, g, y0), 5),
        })
        console.print(
            f"[bold cyan]{label} at {gamma}[/bold cyan]: lambda = {expansion.lam}, "
            f"kappa = {mp.nstr(expansion.kappa, 10)}"
        )
        state.emit(payload)


def _radial_config(
    state: RunState, preset: Optional[ExperimentPreset], dmax: Optional[int],
    schedule: Optional[str],
) -> Config:
    cfg = state.with_preset(preset)
    return cfg.with_overrides(
        dmax=dmax if dmax is not None else (preset.dmax if preset else None),
        t_schedule=schedule or ((preset.schedule or None) if preset else None),
    )


@cli.command("radial")
@click.option("--form", "label", default=None, help="Level one form (default j1)")
@click.option("--r", "r_values", multiple=True, help="Cusp a/c with 4 | c (repeatable)")
@click.option("--dmax", type=int, default=None, help="Cutoff D of the partial sums")
@click.option("--schedule", default=None, help="Decreasing t values, comma separated")
@click.option("--shadow", type=click.Choice(["table", "closed"]), default="table",
              show_default=True, help="Source of W(f) for the L-value side")
@click.option("--preset", "preset_name", default=None, help="Named preset from the YAML file")
@click.option("--from-cache/--no-cache", "use_cache", default=True)
@handle_errors
def radial_command(
    label: Optional[str],
    r_values: Tuple[str, ...],
    dmax: Optional[int],
    schedule: Optional[str],
    shadow: str,
    preset_name: Optional[str],
    use_cache: bool,
) -> None:
    """Radial limit of H(f) at r against -conj(L^reg_r(W(f), 1/2)) + c_r."""
    state = _state()
    preset = get_preset(preset_name, state.config.presets_file) if preset_name else None
    if preset is not None and preset.command != "radial":
        raise InvalidArgumentError(f"Preset '{preset.name}' is a {preset.command} preset")
    cfg = _radial_config(state, preset, dmax, schedule)
    form = label or (preset.forms[0] if preset else "j1")
    cusps = list(r_values) or (preset.r if preset else [])
    if not cusps:
        raise InvalidArgumentError("radial needs at least one --r (or --preset)")
    reports: List[RadialReport] = []
    with mp.workdps(cfg.precision):
        table = _load_table(cfg, form, -cfg.dmax, cfg.dmax, use_cache)
        w = _shadow_for(table, shadow)
        for text in cusps:
            a, c = parse_rational(text)
            reports.append(
                radial_residual(table, a, c, cfg.t_schedule, cfg.dmax, w, cfg.jobs)
            )
    _radial_summary(reports)
    state.emit({
        "form": form,
        "precision": cfg.precision,
        "dmax": cfg.dmax,
        "reports": [report.to_dict() for report in reports],
    })


@cli.command("period-check")
@click.option("--form", "label", default="j1", show_default=True, help="Level one form")
@click.option("--gamma", required=True, help="Matrix a,b,c,d in Gamma_0(4) with c > 0")
@click.option("--x", "x", default=None, help="Real x for the general-x variant")
@click.option("--dmax", type=int, default=None, help="Cutoff D of the partial sums")
@click.option("--schedule", default=None, help="Decreasing t values, comma separated")
@click.option("--shadow", type=click.Choice(["table", "closed"]), default="table",
              show_default=True)
@click.option("--from-cache/--no-cache", "use_cache", default=True)
@handle_errors
def period_check_command(
    label: str,
    gamma: str,
    x: Optional[str],
    dmax: Optional[int],
    schedule: Optional[str],
    shadow: str,
    use_cache: bool,
) -> None:
    """Compare the radial limit with the limit through the period function."""
    state = _state()
    cfg = _radial_config(state, None, dmax, schedule)
    matrix = parse_matrix(gamma)
    with mp.workdps(cfg.precision):
        table = _load_table(cfg, label, -cfg.dmax, cfg.dmax, use_cache)
        w = _shadow_for(table, shadow)
        if x is not None:
            second = radial_general_residual(
                table, matrix, mp.mpf(x), cfg.t_schedule, cfg.dmax, w, cfg.jobs
            )
        else:
            second = period_limit_residual(
                table, matrix, cfg.t_schedule, cfg.dmax, w, cfg.jobs
            )
        first = radial_residual(
            table, second.a, second.c, cfg.t_schedule, cfg.dmax, w, cfg.jobs
        )
        lhs_gap = abs(first.extrapolated - second.extrapolated)
        lhs_tolerance = first.error_bound + second.error_bound
        rhs_gap = abs(first.rhs - second.rhs)
        # both sides evaluate the same gamma-independent L-value
        rhs_tolerance = mp.mpf(10) ** (10 - mp.dps) * max(1, abs(first.rhs))
        lhs_ok = bool(lhs_gap <= lhs_tolerance)
        rhs_ok = bool(rhs_gap <= rhs_tolerance)
        payload = {
            "form": label,
            "precision": cfg.precision,
            "radial": first.to_dict(),
            "comparison": second.to_dict(),
            "lhs_gap": dec(lhs_gap, 10),
            "lhs_tolerance": dec(lhs_tolerance, 10),
            "rhs_gap": dec(rhs_gap, 10),
            "rhs_tolerance": dec(rhs_tolerance, 10),
            "lhs_consistent": lhs_ok,
            "rhs_consistent": rhs_ok,
            "consistent": lhs_ok and rhs_ok,
        }
    _radial_summary([first, second])
    state.emit(payload)


def main() -> None:
    """Console script entry point."""
    cli(prog_name="singular-traces")


if __name__ == "__main__":
    main()
