"""
Radial limits of the trace generating series H(f) = sum_{d>0} Tr_d(f) q^d at
rationals r = a/c with 4 | c, compared with -conj(L^reg_r(W(f), 1/2)) + c_r.

Three left-hand sides are supported:

- ``radial``: H(r + it) + 2 c_r sqrt(1 + ct) / (ct)
- ``period``: the same with H replaced by H - H|gamma^{-1}
- ``general``: H(gamma(x + i/(c^2 t))) plus the matching correction term

Each is evaluated along a decreasing schedule of t and extrapolated to t = 0
by a polynomial in sqrt(t).
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import gcd
from typing import Any, Dict, List, Optional, Sequence, Tuple

from mpmath import mp, mpc, mpf

from .arith import Matrix2Z, chi_theta, cusp_matrix, epsilon, kronecker_ext
from .exceptions import InvalidArgumentError, NumericalFailureError
from .logging_config import get_logger, timed
from .lreg import LregQuery, dual_matrix, lreg_eval, normalized
from .modeval import FormSpec, SeriesValue
from .serialization import complex_dict, dec
from .specfun import power
from .traces import TraceTable, partial_H, w_form

logger = get_logger(__name__)

TAIL_LIMIT = mp.mpf("0.1")
VARIANTS = ("radial", "period", "general")


def _check_cusp(a: int, c: int) -> None:
    if c <= 0 or gcd(a, c) != 1:
        raise InvalidArgumentError(f"{a}/{c} must be reduced with a positive denominator")
    if c % 4:
        raise InvalidArgumentError(
            f"Radial limits need 4 | c (level one forms), got c = {c}"
        )


def _tr0(table: TraceTable) -> mpc:
    return table.get(0).value


def c_r(table: TraceTable, a: int, c: int) -> mpc:
    """e^{i pi/4} eps_a^3 (c/a) Tr_0(f) / sqrt(2c)."""
    _check_cusp(a, c)
    unit = (epsilon(a) ** 3).to_mpc() * kronecker_ext(c, a)
    return mp.expjpi(mp.mpf(1) / 4) * unit * _tr0(table) / mp.sqrt(2 * c)


def radial_lhs(table: TraceTable, a: int, c: int, t: mpf, cutoff: int) -> SeriesValue:
    """partial_H(r + it, D) + 2 c_r sqrt(1 + ct) / (ct)."""
    t = mp.mpf(t)
    if t <= 0:
        raise InvalidArgumentError("t must be positive")
    r = mp.mpf(a) / c
    partial = partial_H(table, mp.mpc(r, t), cutoff)
    correction = 2 * c_r(table, a, c) * mp.sqrt(1 + c * t) / (c * t)
    return SeriesValue(partial.value + correction, partial.error)


def slashed_term(table: TraceTable, gamma: Matrix2Z, t: mpf, cutoff: int) -> SeriesValue:
    """(H|_{1/2} gamma^{-1})(r + it), evaluated at gamma^{-1}(r + it) = -d/c + i/(c^2 t)."""
    gamma = normalized(gamma)
    delta = dual_matrix(gamma)
    c, d = gamma.c, gamma.d
    t = mp.mpf(t)
    point = mp.mpc(mp.mpf(-d) / c, 1 / (c * c * t))
    inner = partial_H(table, point, cutoff)
    factor = chi_theta(delta).inverse().to_mpc() * power(mp.mpc(0, c * t), -mp.mpf(0.5))
    return SeriesValue(factor * inner.value, abs(factor) * inner.error)


def period_lhs(table: TraceTable, gamma: Matrix2Z, t: mpf, cutoff: int) -> SeriesValue:
    """psi_{gamma^{-1}}(r + it) + 2 c_r sqrt(1 + ct) / (ct)."""
    gamma = normalized(gamma)
    base = radial_lhs(table, gamma.a, gamma.c, t, cutoff)
    slash = slashed_term(table, gamma, t, cutoff)
    return SeriesValue(base.value - slash.value, base.error + slash.error)


def radial_general_lhs(
    table: TraceTable, gamma: Matrix2Z, x: mpf, t: mpf, cutoff: int
) -> SeriesValue:
    """H(gamma u) + sqrt(2) chi^{-3}(gamma) Tr_0 (cu+d)^{1/2} ((1/(c^2 t) + 1/c) - i(x + d/c))^{1/2}.

    u = x + i/(c^2 t); at x = -d/c this is radial_lhs.
    """
    gamma = normalized(gamma)
    _check_cusp(gamma.a, gamma.c)
    a, c, d = gamma.a, gamma.c, gamma.d
    x = mp.mpf(x)
    t = mp.mpf(t)
    u = mp.mpc(x, 1 / (c * c * t))
    partial = partial_H(table, gamma.act(u), cutoff)
    inner = mp.mpc(1 / (c * c * t) + mp.mpf(1) / c, -(x + mp.mpf(d) / c))
    correction = (
        mp.sqrt(2) * (chi_theta(gamma) ** -3).to_mpc() * _tr0(table)
        * power(gamma.j(u), mp.mpf(0.5)) * power(inner, mp.mpf(0.5))
    )
    return SeriesValue(partial.value + correction, partial.error)


def radial_rhs(
    table: TraceTable,
    a: int,
    c: int,
    w: Optional[FormSpec] = None,
    gamma: Optional[Matrix2Z] = None,
    t: Optional[mpf] = None,
) -> mpc:
    """-conj(L^reg_r(W(f), 1/2)) + c_r.

    L^reg does not depend on the horocycle height t; the default t = 1/c puts
    both incomplete-gamma sums at the same height 1/c and needs the fewest
    coefficients of W(f).
    """
    _check_cusp(a, c)
    w = w if w is not None else w_form(table)
    t = mp.mpf(t) if t is not None else mp.mpf(1) / c
    query = LregQuery.at_rational(w, a, c, mp.mpf(0.5), t, gamma)
    return -mp.conj(lreg_eval(query)) + c_r(table, a, c)


def extrapolate(ts: Sequence[mpf], values: Sequence[mpc]) -> mpc:
    """Value at t = 0 of the interpolating polynomial in sqrt(t) (Neville)."""
    if len(ts) != len(values) or not ts:
        raise InvalidArgumentError("Extrapolation needs matching, non-empty inputs")
    us = [mp.sqrt(mp.mpf(t)) for t in ts]
    table = [mp.mpc(v) for v in values]
    n = len(us)
    for level in range(1, n):
        for i in range(n - level):
            j = i + level
            table[i] = (us[j] * table[i] - us[i] * table[i + 1]) / (us[j] - us[i])
    return table[0]


def extrapolation_weights(ts: Sequence[mpf]) -> List[mpf]:
    """Lagrange weights l_i(0) in sqrt(t); extrapolate() is sum l_i(0) v_i."""
    us = [mp.sqrt(mp.mpf(t)) for t in ts]
    weights: List[mpf] = []
    for i, ui in enumerate(us):
        weight = mp.mpf(1)
        for j, uj in enumerate(us):
            if j != i:
                weight *= uj / (uj - ui)
        weights.append(weight)
    return weights


def extrapolation_error(ts: Sequence[mpf], values: Sequence[mpc]) -> mpf:
    """Change of the extrapolated value when the smallest t is dropped.

    The schedule decreases, so the last point is the smallest t. A single
    point has no estimate and gives zero.
    """
    if len(ts) != len(values) or not ts:
        raise InvalidArgumentError("Extrapolation needs matching, non-empty inputs")
    if len(ts) == 1:
        return mp.mpf(0)
    return abs(extrapolate(ts, values) - extrapolate(ts[:-1], values[:-1]))


@dataclass
class RadialReport:
    """Both sides of the radial identity along a t-schedule."""

    form: str
    a: int
    c: int
    variant: str
    c_r: mpc
    schedule: List[mpf]
    lhs: List[mpc]
    lhs_errors: List[mpf]
    extrapolated: mpc
    rhs: mpc
    residual: mpf
    cutoff: int
    extrapolation_error: mpf = mp.zero
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def residuals(self) -> List[mpf]:
        return [abs(v - self.rhs) for v in self.lhs]

    @property
    def error_bound(self) -> mpf:
        """Tail bounds carried through the extrapolation plus the extrapolation error."""
        weights = extrapolation_weights(self.schedule)
        carried = mp.fsum(abs(w) * e for w, e in zip(weights, self.lhs_errors))
        return carried + self.extrapolation_error

    @property
    def monotone(self) -> bool:
        values = self.residuals
        return all(b <= a for a, b in zip(values, values[1:]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "form": self.form,
            "r": f"{self.a}/{self.c}",
            "variant": self.variant,
            "c_r": complex_dict(self.c_r),
            "cutoff": self.cutoff,
            "steps": [
                {
                    "t": dec(t, 10),
                    "lhs": complex_dict(v),
                    "tail_bound": dec(e, 10),
                    "residual": dec(abs(v - self.rhs), 15),
                }
                for t, v, e in zip(self.schedule, self.lhs, self.lhs_errors)
            ],
            "extrapolated": complex_dict(self.extrapolated),
            "extrapolation_error": dec(self.extrapolation_error, 10),
            "error_bound": dec(self.error_bound, 10),
            "rhs": complex_dict(self.rhs),
            "residual": dec(self.residual, 15),
            "diagnostics": self.diagnostics,
        }


def _lhs(
    table: TraceTable,
    variant: str,
    gamma: Matrix2Z,
    x: Optional[mpf],
    t: mpf,
    cutoff: int,
) -> SeriesValue:
    if variant == "radial":
        return radial_lhs(table, gamma.a, gamma.c, t, cutoff)
    if variant == "period":
        return period_lhs(table, gamma, t, cutoff)
    if x is None:
        x = mp.mpf(-gamma.d) / gamma.c
    return radial_general_lhs(table, gamma, x, t, cutoff)


def _lhs_worker(
    table_data: Dict[str, Any],
    variant: str,
    gamma: Tuple[int, int, int, int],
    x: Optional[str],
    t: str,
    cutoff: int,
    dps: int,
) -> Tuple[str, str, str]:
    with mp.workdps(dps):
        table = TraceTable.from_dict(table_data)
        value = _lhs(
            table, variant, Matrix2Z(*gamma), mp.mpf(x) if x is not None else None,
            mp.mpf(t), cutoff,
        )
        return (
            mp.nstr(value.value.real, dps),
            mp.nstr(value.value.imag, dps),
            mp.nstr(value.error, 10),
        )


def _evaluate_schedule(
    table: TraceTable,
    variant: str,
    gamma: Matrix2Z,
    x: Optional[mpf],
    schedule: List[mpf],
    cutoff: int,
    jobs: int,
) -> List[SeriesValue]:
    if jobs <= 1 or len(schedule) == 1:
        return [_lhs(table, variant, gamma, x, t, cutoff) for t in schedule]
    data = table.to_dict()
    dps = mp.dps
    x_text = mp.nstr(x, dps) if x is not None else None
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [
            pool.submit(
                _lhs_worker, data, variant, gamma.as_tuple(), x_text,
                mp.nstr(t, dps), cutoff, dps,
            )
            for t in schedule
        ]
        raw = [future.result() for future in futures]
    return [SeriesValue(mp.mpc(mp.mpf(re_), mp.mpf(im_)), mp.mpf(err)) for re_, im_, err in raw]


def _run(
    table: TraceTable,
    variant: str,
    gamma: Matrix2Z,
    schedule: Sequence[float],
    cutoff: int,
    w: Optional[FormSpec],
    x: Optional[mpf],
    jobs: int,
) -> RadialReport:
    if variant not in VARIANTS:
        raise InvalidArgumentError(f"Unknown variant '{variant}'")
    ts = [mp.mpf(t) for t in schedule]
    if not ts or any(t <= 0 for t in ts) or any(b >= a for a, b in zip(ts, ts[1:])):
        raise InvalidArgumentError("The t-schedule must be positive and strictly decreasing")
    gamma = normalized(gamma)
    a, c = gamma.a, gamma.c
    _check_cusp(a, c)
    if cutoff > table.index_range[1]:
        raise InvalidArgumentError(
            f"Cutoff {cutoff} exceeds the trace table (up to {table.index_range[1]})"
        )
    rhs = radial_rhs(table, a, c, w, gamma)
    with timed(logger, "Evaluated %d schedule points for %d/%d (%s)", len(ts), a, c, variant):
        values = _evaluate_schedule(table, variant, gamma, x, ts, cutoff, jobs)
    worst_tail = max(v.error for v in values)
    if worst_tail > TAIL_LIMIT * abs(rhs):
        raise NumericalFailureError(
            f"Tail bound {mp.nstr(worst_tail, 5)} of the partial sums at D = {cutoff} "
            f"exceeds 10% of |rhs| = {mp.nstr(abs(rhs), 5)}; raise D or the smallest t"
        )
    lhs = [v.value for v in values]
    extrapolated = extrapolate(ts, lhs)
    report = RadialReport(
        form=table.form,
        a=a,
        c=c,
        variant=variant,
        c_r=c_r(table, a, c),
        schedule=ts,
        lhs=lhs,
        lhs_errors=[v.error for v in values],
        extrapolated=extrapolated,
        rhs=rhs,
        residual=abs(extrapolated - rhs),
        cutoff=cutoff,
        extrapolation_error=extrapolation_error(ts, lhs),
    )
    report.diagnostics = {
        "gamma": list(gamma.as_tuple()),
        "trend": "non-increasing" if report.monotone else "non-monotone",
        "max_tail_bound": dec(worst_tail, 5),
    }
    if x is not None:
        report.diagnostics["x"] = dec(x, 15)
    if not report.monotone:
        logger.warning(
            "Residuals along the schedule are not non-increasing for r = %d/%d (%s)",
            a, c, variant,
        )
    logger.info(
        "Radial %s at %d/%d: extrapolated residual %s",
        variant, a, c, mp.nstr(report.residual, 5),
    )
    return report


def radial_residual(
    table: TraceTable,
    a: int,
    c: int,
    schedule: Sequence[float],
    cutoff: int,
    w: Optional[FormSpec] = None,
    jobs: int = 1,
) -> RadialReport:
    """Radial limit at r = a/c along the schedule against the L-value side."""
    _check_cusp(a, c)
    return _run(table, "radial", cusp_matrix(a, c), schedule, cutoff, w, None, jobs)


def period_limit_residual(
    table: TraceTable,
    gamma: Matrix2Z,
    schedule: Sequence[float],
    cutoff: int,
    w: Optional[FormSpec] = None,
    jobs: int = 1,
) -> RadialReport:
    """The same limit approached through the period function psi_{gamma^{-1}}."""
    gamma = normalized(gamma)
    if gamma.c <= 0:
        raise InvalidArgumentError("The period limit needs gamma with c > 0")
    return _run(table, "period", gamma, schedule, cutoff, w, None, jobs)


def radial_general_residual(
    table: TraceTable,
    gamma: Matrix2Z,
    x: mpf,
    schedule: Sequence[float],
    cutoff: int,
    w: Optional[FormSpec] = None,
    jobs: int = 1,
) -> RadialReport:
    """Limit along gamma(x + i/(c^2 t)) for an arbitrary real x."""
    return _run(table, "general", gamma, schedule, cutoff, w, mp.mpf(x), jobs)
