"""
Modular traces Tr_d(f) of a level one weakly holomorphic modular function.

- d < 0: weighted sums of CM values.
- d > 0 nonsquare: cycle integrals over closed geodesics.
- d > 0 square: regularized periods over infinite geodesics.
- d = 0: the regularized average over the fundamental domain.

A TraceTable collects these values together with the complementary traces
and produces the coefficients of the shadow W(f) and partial sums of the
generating series H(f).
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Any, Dict, Iterable, List, Optional, Tuple

from mpmath import mp, mpc, mpf
from sympy import divisor_sigma

from .arith import cusp_matrix
from .exceptions import (
    InsufficientDataError,
    InvalidArgumentError,
    NumericalFailureError,
    UnsupportedInputError,
)
from .logging_config import get_logger, timed
from .modeval import (
    FormSpec,
    Growth,
    SeriesValue,
    get_form,
    required_cutoff,
    tail_bound,
)
from .qforms import (
    class_reps_definite,
    class_reps_indefinite,
    cm_point,
    geodesic_arc,
    is_square,
    stabilizer_order,
)
from .serialization import complex_dict, complex_from_dict, dec
from .specfun import exp_int

logger = get_logger(__name__)

PANEL_LENGTH = mp.mpf(0.5)
DEFAULT_GROWTH_RATE = mp.pi
GUARD_EXTRA = 5
ESTIMATE_DPS = 20


@dataclass(frozen=True)
class TraceValue:
    """A trace together with an absolute error bound."""

    value: mpc
    error: mpf

    def to_dict(self, d: int) -> Dict[str, Any]:
        out: Dict[str, Any] = {"d": d, "err": dec(self.error, 10)}
        out.update(complex_dict(self.value))
        return out


def _rounding_error(value: mpc) -> mpf:
    return mp.mpf(10) ** (-(mp.dps - 10)) * max(1, abs(value))


def _check_index(d: int) -> None:
    if d % 4 not in (0, 1):
        raise InvalidArgumentError(f"Index {d} is not 0 or 1 mod 4")


def _check_level_one(f: FormSpec) -> None:
    if f.level != 1 or f.weight != 0:
        raise UnsupportedInputError(
            f"Traces are implemented for level one modular functions, got {f.label}"
        )


def peak_bound(f: FormSpec, height: mpf) -> mpf:
    """Bound on |f| over the fundamental domain below Im z = height."""
    with mp.workdps(ESTIMATE_DPS):
        floor = mp.sqrt(3) / 2
        height = max(mp.mpf(height), floor)
        principal = mp.fsum(
            abs(f.a(n)) * mp.exp(-2 * mp.pi * n * height) for n in range(f.n_min, 0)
        )
        return principal + abs(f.a(0)) + tail_bound(f.growth, floor, 1)


def guard_digits(f: FormSpec, height: mpf) -> int:
    """Extra digits that absorb the cancellation of values of size peak_bound(f, height)."""
    peak = peak_bound(f, height)
    with mp.workdps(ESTIMATE_DPS):
        return max(0, int(mp.ceil(mp.log10(max(peak, 1))))) + GUARD_EXTRA


def _cancellation_error(mass: mpf) -> mpf:
    """Rounding left in an integral whose integrand has L1 mass ``mass``."""
    return mp.mpf(mass) * mp.mpf(10) ** (-(mp.dps - 3))


def _has_real_coefficients(f: FormSpec) -> bool:
    return all(mp.im(f.a(n)) == 0 for n in range(f.n_min, 1))


def _check_hermitian(f: FormSpec, d: int, value: TraceValue) -> None:
    """Real-coefficient forms have real traces; a larger imaginary part means lost digits."""
    if not _has_real_coefficients(f):
        return
    if abs(value.value.imag) > value.error:
        raise NumericalFailureError(
            f"Tr_{d}({f.label}) has imaginary part {mp.nstr(value.value.imag, 5)} above its "
            f"error bound {mp.nstr(value.error, 5)}; raise the precision"
        )


def trace_neg(f: FormSpec, d: int) -> TraceValue:
    """Sum of f(z_Q) / |Gamma_Q| over the classes of discriminant d < 0."""
    if d >= 0:
        raise InvalidArgumentError(f"trace_neg needs d < 0, got {d}")
    _check_index(d)
    _check_level_one(f)
    total = mp.mpc(0)
    for form in class_reps_definite(d):
        total += f.evaluate(cm_point(form)) / stabilizer_order(form)
    return TraceValue(total, _rounding_error(total))


def geodesic_height(d: int) -> mpf:
    """Every point of a closed geodesic of discriminant d reduces below Im z = sqrt(d)/2."""
    return mp.sqrt(d) / 2


def _cycle_integral(
    f: FormSpec, form: Any, offset: mpf, peak: mpf
) -> Tuple[mpc, mpf]:
    arc = geodesic_arc(form)
    start = mp.mpf(offset)
    panels = max(1, int(mp.ceil(arc.length / PANEL_LENGTH)))
    nodes = mp.linspace(start, start + arc.length, panels + 1)

    def integrand(s: mpf) -> mpc:
        z = arc.point(s)
        return f.evaluate(z) * arc.derivative(s) / form.value(z)

    value, error = mp.quad(integrand, nodes, method="gauss-legendre", error=True)
    # |dz / Q(z, 1)| = ds / sqrt(d) on the geodesic
    mass = peak * arc.length / mp.sqrt(form.discriminant)
    return arc.orientation * value, error + _cancellation_error(mass)


def cycle_integral(f: FormSpec, form: Any, offset: mpf = mp.zero) -> Tuple[mpc, mpf]:
    """Integral of f(z) dz/Q(z, 1) over one properly oriented period of the geodesic of Q.

    ``offset`` moves the starting point along the geodesic. The integrand
    reaches peak_bound(f, sqrt(d)/2) near cusps while the integral is much
    smaller, so the work is done with guard digits on top of the caller's
    precision.
    """
    height = geodesic_height(form.discriminant)
    peak = peak_bound(f, height)
    with mp.workdps(mp.dps + guard_digits(f, height)):
        return _cycle_integral(f, form, offset, peak)


def trace_pos_nonsquare(f: FormSpec, d: int, offset: mpf = mp.zero) -> TraceValue:
    """(1/2 pi) times the sum of cycle integrals over the classes of discriminant d."""
    _check_index(d)
    _check_level_one(f)
    if d <= 0:
        raise InvalidArgumentError(f"trace_pos_nonsquare needs d > 0, got {d}")
    if is_square(d):
        return trace_pos_square(f, d)
    height = geodesic_height(d)
    peak = peak_bound(f, height)
    guard = guard_digits(f, height)
    with mp.workdps(mp.dps + guard):
        total = mp.mpc(0)
        error = mp.mpf(0)
        for form in class_reps_indefinite(d):
            value, err = _cycle_integral(f, form, offset, peak)
            logger.debug("Cycle integral for %s: %s", form, mp.nstr(value, 15))
            total += value
            error += err
        scale = 1 / (2 * mp.pi)
        total *= scale
        error *= scale
    logger.debug("Tr_%d(%s) computed with %d guard digits", d, f.label, guard)
    result = TraceValue(+total, error + _rounding_error(total))
    _check_hermitian(f, d, result)
    return result


def _vertical_period(f: FormSpec, r: Fraction, height: mpf) -> Tuple[mpc, mpf]:
    anchor = max(height, mp.mpf(1))
    tolerance = mp.mpf(10) ** (-mp.dps - 5)
    cutoff = required_cutoff(f.growth, anchor, tolerance)
    f.require(cutoff)
    rr = mp.mpf(r.numerator) / r.denominator
    terms = [
        f.a(n) * mp.expjpi(2 * n * rr) * exp_int(2 * mp.pi * n * anchor)
        for n in range(f.n_min, cutoff + 1)
        if n != 0
    ]
    series = mp.fsum(terms) - f.a(0) * mp.log(anchor)
    error = tail_bound(f.growth, anchor, cutoff + 1)
    error += _cancellation_error(mp.fsum(abs(term) for term in terms))
    if height >= anchor:
        return series, error
    lower = mp.log(height)
    body, body_error = mp.quad(
        lambda u: f.evaluate(mp.mpc(rr, mp.exp(u))),
        mp.linspace(lower, 0, max(2, int(mp.ceil(-lower)) + 1)),
        method="gauss-legendre",
        error=True,
    )
    mass = peak_bound(f, _vertical_height(r, height)) * (-lower)
    return series + body, error + body_error + _cancellation_error(mass)


def _vertical_height(r: Fraction, height: mpf) -> mpf:
    """Reduced heights met by r + iy, height <= y, stay below this bound.

    Im(M(r + iy)) <= q/2 for the M with M(r) finite, 1/(q^2 y) for the one
    sending r to infinity, and y itself for translations.
    """
    q = r.denominator
    return max(mp.mpf(1), mp.mpf(q) / 2, 1 / (q * q * height), height)


def vertical_period(f: FormSpec, r: Fraction, height: mpf) -> Tuple[mpc, mpf]:
    """Regularized int_height^infinity f(r + iy) dy / y.

    Equal to -a(0) log(height) + sum_{n != 0} a(n) e^{2 pi i n r} EI(2 pi n height).
    Below height 1 the piece [height, 1] is integrated numerically and the
    series is taken at height 1, where it converges quickly.
    """
    height = mp.mpf(height)
    with mp.workdps(mp.dps + guard_digits(f, _vertical_height(r, height))):
        return _vertical_period(f, r, height)


def _square_index_heights(
    m: int, c: int, height: Optional[mpf]
) -> Tuple[Fraction, Fraction, mpf, mpf]:
    r = Fraction(-c, m)
    p, q = r.numerator, r.denominator
    h = mp.mpf(height) if height is not None else mp.mpf(1) / q
    sigma = cusp_matrix(p, q)
    return r, Fraction(-sigma.d, q), h, 1 / (q * q * h)


def _square_index_period(
    f: FormSpec, m: int, c: int, height: Optional[mpf]
) -> Tuple[mpc, mpf]:
    r, r_tilde, h, c_tilde = _square_index_heights(m, c, height)
    upper, upper_err = _vertical_period(f, r, h)
    lower, lower_err = _vertical_period(f, r_tilde, c_tilde)
    return (upper + lower) / m, (upper_err + lower_err) / m


def _square_guard(f: FormSpec, m: int, c: int, height: Optional[mpf]) -> int:
    r, r_tilde, h, c_tilde = _square_index_heights(m, c, height)
    return guard_digits(
        f, max(_vertical_height(r, h), _vertical_height(r_tilde, c_tilde), geodesic_height(m * m))
    )


def square_index_period(
    f: FormSpec, m: int, c: int, height: Optional[mpf] = None
) -> Tuple[mpc, mpf]:
    """Regularized period of the form [0, m, c] (vertical geodesic at -c/m).

    The upper half is cut at ``height`` (default 1/q for r = p/q), the lower
    half is expanded at the cusp r through sigma in SL2(Z) with sigma(oo) = r,
    cut at c~ = Im(sigma^{-1}(r + i height)) = 1 / (q^2 height).
    """
    with mp.workdps(mp.dps + _square_guard(f, m, c, height)):
        return _square_index_period(f, m, c, height)


def trace_pos_square(f: FormSpec, d: int, height: Optional[mpf] = None) -> TraceValue:
    """Trace of square index d = m^2 from the m classes [0, m, c], 0 <= c < m."""
    if d <= 0 or not is_square(d):
        raise InvalidArgumentError(f"trace_pos_square needs a positive square, got {d}")
    _check_level_one(f)
    m = isqrt(d)
    guard = max(_square_guard(f, m, c, height) for c in range(m))
    with mp.workdps(mp.dps + guard):
        total = mp.mpc(0)
        error = mp.mpf(0)
        for c in range(m):
            value, err = _square_index_period(f, m, c, height)
            total += value
            error += err
        scale = 1 / (2 * mp.pi)
        total *= scale
        error *= scale
    result = TraceValue(+total, error + _rounding_error(total))
    _check_hermitian(f, d, result)
    return result


ZERO_METHODS = ("quadrature", "fourier")


def _zero_quadrature(f: FormSpec, height: mpf) -> Tuple[mpc, mpf]:
    half = mp.mpf(0.5)

    def column(x: mpf) -> mpc:
        floor = mp.sqrt(1 - x * x)
        return mp.quad(
            lambda y: f.evaluate(mp.mpc(x, y)) / (y * y), [floor, 1],
            method="gauss-legendre",
        )

    body, body_err = mp.quad(column, [-half, 0, half], method="gauss-legendre", error=True)
    strip = mp.mpc(0)
    strip_err = mp.mpf(0)
    if height > 1:
        def row(y: mpf) -> mpc:
            return mp.quad(
                lambda x: f.evaluate(mp.mpc(x, y)), [-half, 0, half],
                method="gauss-legendre",
            ) / (y * y)

        nodes = mp.linspace(1, height, max(2, int(mp.ceil(height))))
        strip, strip_err = mp.quad(row, nodes, method="gauss-legendre", error=True)
    logger.debug("Tr_0(%s): body %s, strip %s", f.label, mp.nstr(body, 15), mp.nstr(strip, 5))
    return body + strip, body_err + strip_err


def _zero_fourier(f: FormSpec) -> mpc:
    # Stokes with dmu = (2 pi / 3i) dbar(E2*): the regularized integral is
    # (pi/3) times the constant term of f E2
    total = mp.mpc(f.a(0))
    for n in range(1, -f.n_min + 1):
        total -= 24 * int(divisor_sigma(n, 1)) * f.a(-n)
    return mp.pi / 3 * total


def trace_zero(
    f: FormSpec, height: mpf = mp.mpf(6), method: str = "quadrature"
) -> TraceValue:
    """-(1/2 pi) times the regularized integral of f over the fundamental domain.

    ``quadrature`` integrates over the domain truncated at Im z = height.
    Above the truncation only the constant Fourier mode survives the
    x-integration and it vanishes, so the truncated integral is the
    regularized one. ``fourier`` evaluates the same integral exactly from the
    principal part, 4 sum_{n>0} sigma(n) a(-n) for the trace.
    """
    _check_level_one(f)
    if method not in ZERO_METHODS:
        raise InvalidArgumentError(
            f"Unknown Tr_0 method '{method}', expected one of {', '.join(ZERO_METHODS)}"
        )
    if f.constant_term() != 0:
        raise UnsupportedInputError(
            f"Tr_0 needs a vanishing constant term, {f.label} has a(0) = "
            f"{mp.nstr(f.constant_term(), 10)}"
        )
    if method == "fourier":
        total = -_zero_fourier(f) / (2 * mp.pi)
        return TraceValue(total, _rounding_error(total))
    height = mp.mpf(height)
    with mp.workdps(mp.dps + guard_digits(f, height)):
        integral, error = _zero_quadrature(f, height)
        # the truncated domain has hyperbolic area below 2
        error += _cancellation_error(2 * peak_bound(f, height))
    total = -integral / (2 * mp.pi)
    return TraceValue(total, error / (2 * mp.pi) + _rounding_error(total))


def trace_comp(f: FormSpec, d: int) -> mpc:
    """Complementary trace Tr^c_{d^2}(f) = 2d sum_{n<0} a(dn)."""
    if d <= 0:
        raise InvalidArgumentError(f"Complementary traces need d > 0, got {d}")
    total = mp.mpc(0)
    n = -1
    while d * n >= f.n_min:
        total += f.a(d * n)
        n -= 1
    return 2 * d * total


def trace(
    f: FormSpec, d: int, zero_height: mpf = mp.mpf(6), zero_method: str = "fourier"
) -> TraceValue:
    """Dispatch on the sign and shape of d."""
    _check_index(d)
    if d < 0:
        return trace_neg(f, d)
    if d == 0:
        return trace_zero(f, zero_height, zero_method)
    if is_square(d):
        return trace_pos_square(f, d)
    return trace_pos_nonsquare(f, d)


def calibrated_growth(values: Dict[int, mpc], rate: mpf = DEFAULT_GROWTH_RATE) -> Growth:
    """C e^{rate sqrt|d|} with C ten times the largest observed ratio."""
    rate = mp.mpf(rate)
    ratios = [abs(v) * mp.exp(-rate * mp.sqrt(abs(d))) for d, v in values.items() if d]
    constant = 10 * max(ratios) if ratios else mp.mpf(0)
    return Growth(constant, rate)


@dataclass
class TraceTable:
    """Traces of one form over a range of indices.

    ``comp`` is keyed by d^2. Indices that are 2 or 3 mod 4 have no forms
    and are treated as zero traces.
    """

    form: str
    precision: int
    neg: Dict[int, TraceValue] = field(default_factory=dict)
    pos_nonsquare: Dict[int, TraceValue] = field(default_factory=dict)
    pos_square: Dict[int, TraceValue] = field(default_factory=dict)
    zero: Optional[TraceValue] = None
    comp: Dict[int, mpc] = field(default_factory=dict)
    growth_rate: mpf = DEFAULT_GROWTH_RATE

    def add(self, d: int, value: TraceValue) -> None:
        if d < 0:
            self.neg[d] = value
        elif d == 0:
            self.zero = value
        elif is_square(d):
            self.pos_square[d] = value
        else:
            self.pos_nonsquare[d] = value

    def get(self, d: int) -> TraceValue:
        if d % 4 in (2, 3):
            return TraceValue(mp.mpc(0), mp.mpf(0))
        if d == 0:
            if self.zero is None:
                raise InsufficientDataError("Tr_0 is missing from the table", required=0)
            return self.zero
        source = self.neg if d < 0 else (self.pos_square if is_square(d) else self.pos_nonsquare)
        if d not in source:
            raise InsufficientDataError(f"Trace of index {d} is missing", required=d)
        return source[d]

    def indices(self) -> List[int]:
        keys = list(self.neg) + list(self.pos_nonsquare) + list(self.pos_square)
        if self.zero is not None:
            keys.append(0)
        return sorted(keys)

    @property
    def index_range(self) -> Tuple[int, int]:
        keys = self.indices()
        return (keys[0], keys[-1]) if keys else (0, 0)

    def negative_traces(self) -> Dict[int, mpc]:
        return {d: v.value for d, v in self.neg.items()}

    def positive_traces(self) -> Dict[int, mpc]:
        values = {d: v.value for d, v in self.pos_nonsquare.items()}
        values.update({d: v.value for d, v in self.pos_square.items()})
        return values

    def negative_growth(self) -> Growth:
        return calibrated_growth(self.negative_traces(), self.growth_rate)

    def shadow_coefficients(self) -> Dict[int, mpc]:
        """Coefficients of W(f) keyed by exponent, see assemble_W."""
        return assemble_W(self).coefficients

    def positive_growth(self) -> Growth:
        return calibrated_growth(self.positive_traces(), self.growth_rate)

    def covers(self, lo: int, hi: int) -> bool:
        for d in range(lo, hi + 1):
            if d % 4 in (2, 3):
                continue
            try:
                self.get(d)
            except InsufficientDataError:
                return False
        return True

    def restricted(self, lo: int, hi: int) -> "TraceTable":
        out = TraceTable(self.form, self.precision, comp=dict(self.comp), growth_rate=self.growth_rate)
        for d in self.indices():
            if lo <= d <= hi:
                out.add(d, self.get(d))
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "form": self.form,
            "precision": self.precision,
            "traces": [self.get(d).to_dict(d) for d in self.indices()],
            "complementary": [
                dict(complex_dict(v), d=isqrt(key)) for key, v in sorted(self.comp.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TraceTable":
        try:
            table = cls(str(data["form"]), int(data["precision"]))
            for entry in data["traces"]:
                value = complex_from_dict(entry)
                table.add(int(entry["d"]), TraceValue(value, mp.mpf(entry.get("err", "0"))))
            for entry in data.get("complementary", []):
                table.comp[int(entry["d"]) ** 2] = complex_from_dict(entry)
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidArgumentError(f"Malformed trace table: {e}") from e
        return table


def _trace_worker(
    label: str, d: int, dps: int, zero_height: float, zero_method: str
) -> Tuple[int, str, str, str]:
    with mp.workdps(dps):
        value = trace(get_form(label), d, mp.mpf(zero_height), zero_method)
        return (
            d,
            mp.nstr(value.value.real, dps),
            mp.nstr(value.value.imag, dps),
            mp.nstr(value.error, 10),
        )


def _indices(lo: int, hi: int, include_zero: bool) -> List[int]:
    return [
        d for d in range(lo, hi + 1)
        if d % 4 in (0, 1) and (d != 0 or include_zero)
    ]


def build_table(
    label: str,
    lo: int,
    hi: int,
    precision: Optional[int] = None,
    jobs: int = 1,
    zero_height: float = 6.0,
    zero_method: str = "fourier",
    include_zero: bool = True,
    growth_rate: mpf = DEFAULT_GROWTH_RATE,
) -> TraceTable:
    """Compute the traces of a registered form for lo <= d <= hi.

    Indices are independent; with jobs > 1 they are spread over a process
    pool and merged in index order.
    """
    precision = precision or mp.dps
    f = get_form(label)
    indices = _indices(lo, hi, include_zero)
    logger.info("Building trace table for %s on %d..%d (%d indices)", label, lo, hi, len(indices))
    table = TraceTable(label, precision, growth_rate=mp.mpf(growth_rate))
    results: Iterable[Tuple[int, str, str, str]]
    with timed(logger, "Computed %d traces of %s", len(indices), label):
        if jobs > 1 and len(indices) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [
                    pool.submit(_trace_worker, label, d, precision, zero_height, zero_method)
                    for d in indices
                ]
                results = [future.result() for future in futures]
        else:
            results = [
                _trace_worker(label, d, precision, zero_height, zero_method)
                for d in indices
            ]
    with mp.workdps(precision):
        for d, re_, im_, err in sorted(results):
            table.add(d, TraceValue(mp.mpc(mp.mpf(re_), mp.mpf(im_)), mp.mpf(err)))
        top = max(-f.n_min, isqrt(max(hi, 0)), 1)
        for d in range(1, top + 1):
            table.comp[d * d] = trace_comp(f, d)
    logger.info("Trace table for %s complete: %d entries", label, len(table.indices()))
    return table


@dataclass(frozen=True)
class WCoefficients:
    """Coefficients of W(f) keyed by exponent of q."""

    coefficients: Dict[int, mpc]
    max_exponent: int

    def coefficient(self, n: int) -> mpc:
        if n > self.max_exponent:
            raise InsufficientDataError(
                f"W coefficient at q^{n} needs Tr_{-n}", required=-n
            )
        return self.coefficients.get(n, mp.mpc(0))

    def as_list(self) -> List[Tuple[int, mpc]]:
        return sorted(self.coefficients.items())

    @property
    def min_exponent(self) -> int:
        return min(self.coefficients) if self.coefficients else 0


def assemble_W(table: TraceTable, dmax: Optional[int] = None) -> WCoefficients:
    """W(f) = -1/2 sum conj(Tr^c_{d^2}) q^{-d^2} + 1/2 conj(Tr_0) + sum_{d<0} conj(Tr_d) q^{-d}."""
    if table.zero is None:
        raise InsufficientDataError("W(f) needs Tr_0", required=0)
    available = [-d for d in table.neg]
    top = dmax if dmax is not None else max(available, default=0)
    coefficients: Dict[int, mpc] = {}
    for key, value in table.comp.items():
        if value != 0:
            coefficients[-key] = -mp.conj(value) / 2
    coefficients[0] = mp.conj(table.zero.value) / 2
    for n in range(1, top + 1):
        if (-n) % 4 in (2, 3):
            continue
        if -n not in table.neg:
            raise InsufficientDataError(f"W(f) needs Tr_{-n}", required=-n)
        coefficients[n] = mp.conj(table.neg[-n].value)
    return WCoefficients(coefficients, top)


def w_form(table: TraceTable, dmax: Optional[int] = None) -> FormSpec:
    """W(f) as a weight 3/2 form on Gamma_0(4), usable by the L-function code."""
    w = assemble_W(table, dmax)
    return FormSpec(
        f"W({table.form})",
        mp.mpf(1.5),
        4,
        w.min_exponent,
        w.coefficient,
        n_max=w.max_exponent,
        growth=table.negative_growth(),
    )


def partial_H(table: TraceTable, z: mpc, cutoff: int) -> SeriesValue:
    """sum_{0 < d <= cutoff} Tr_d e^{2 pi i d z}, with a bound on the tail."""
    z = mp.mpc(z)
    if z.imag <= 0:
        raise InvalidArgumentError("partial_H needs Im z > 0")
    q = mp.expj(2 * mp.pi * z)
    total = mp.mpc(0)
    for d in range(1, cutoff + 1):
        if d % 4 in (2, 3):
            continue
        total += table.get(d).value * q ** d
    return SeriesValue(total, tail_bound(table.positive_growth(), z.imag, cutoff + 1))
