"""
High precision evaluation of modular forms and the registry of forms the
toolkit works with.

Every evaluator first moves its argument into a region of fast convergence
(the SL2(Z) fundamental domain, or for the Jacobi thetas a chain of T and S
steps) and undoes the move with the appropriate automorphy factor.
"""

from dataclasses import dataclass, field
from math import isqrt
from typing import Callable, Dict, List, Optional, Protocol, Tuple

from mpmath import mp, mpc, mpf
from sympy import divisor_sigma

from .arith import Matrix2Z
from .exceptions import DomainError, InsufficientDataError, InvalidArgumentError
from .logging_config import get_logger

logger = get_logger(__name__)

Coefficient = Callable[[int], mpc]
Evaluator = Callable[[mpc], mpc]


def _check_upper(z: mpc) -> mpc:
    z = mp.mpc(z)
    if z.imag <= 0:
        raise DomainError(f"Point {mp.nstr(z, 8)} is not in the upper half-plane")
    return z


def _q(z: mpc) -> mpc:
    return mp.expj(2 * mp.pi * z)


def reduce_to_fundamental_domain(z: mpc) -> Tuple[mpc, Matrix2Z]:
    """Return (z', M) with z' = M z in the standard fundamental domain."""
    z = _check_upper(z)
    m = Matrix2Z.identity()
    for _ in range(10000):
        n = int(mp.floor(z.real + mp.mpf(0.5)))
        if n:
            z = z - n
            m = Matrix2Z.T(-n) @ m
        if abs(z) < 1:
            z = -1 / z
            m = Matrix2Z.S() @ m
        else:
            return z, m
    raise DomainError(f"Reduction of {mp.nstr(z, 8)} did not terminate")


def _lambert(z: mpc, power_: int) -> mpc:
    """sum_{n>=1} n^power q^n / (1 - q^n) at a reduced point."""
    q = _q(z)
    eps = mp.mpf(10) ** (-mp.dps - 5)
    total = mp.mpc(0)
    qn = q
    n = 1
    while True:
        term = mp.mpf(n) ** power_ * qn / (1 - qn)
        total += term
        if abs(term) < eps * max(1, abs(total)):
            return total
        n += 1
        qn *= q


def _eta_reduced(z: mpc) -> mpc:
    q = _q(z)
    return mp.expj(mp.pi * z / 12) * mp.qp(q, q)


def eval_eta(z: mpc) -> mpc:
    """Dedekind eta, pulled back from the fundamental domain step by step."""
    z = _check_upper(z)
    factor = mp.mpc(1)
    for _ in range(10000):
        n = int(mp.floor(z.real + mp.mpf(0.5)))
        if n:
            # eta(z) = e^{i pi n / 12} eta(z - n)
            factor *= mp.expjpi(mp.mpf(n) / 12)
            z = z - n
        if abs(z) < 1:
            # eta(z) = eta(-1/w) / sqrt(w/i) with w = z
            factor /= mp.sqrt(z / mp.j)
            z = -1 / z
        else:
            return factor * _eta_reduced(z)
    raise DomainError("eta reduction did not terminate")


def eval_delta(z: mpc) -> mpc:
    """Delta = eta^24."""
    return eval_eta(z) ** 24


def _weight_factor(m: Matrix2Z, z: mpc, weight: int) -> mpc:
    return m.j(z) ** weight


def eval_e4(z: mpc) -> mpc:
    z = _check_upper(z)
    zr, m = reduce_to_fundamental_domain(z)
    return (1 + 240 * _lambert(zr, 3)) / _weight_factor(m, z, 4)


def eval_e6(z: mpc) -> mpc:
    z = _check_upper(z)
    zr, m = reduce_to_fundamental_domain(z)
    return (1 - 504 * _lambert(zr, 5)) / _weight_factor(m, z, 6)


def eval_j(z: mpc) -> mpc:
    """j = E4^3 / Delta, computed at the reduced point (j is invariant)."""
    zr, _ = reduce_to_fundamental_domain(z)
    e4 = 1 + 240 * _lambert(zr, 3)
    return e4 ** 3 / _eta_reduced(zr) ** 24


def eval_j1(z: mpc) -> mpc:
    """j - 744."""
    return eval_j(z) - 744


def _jacobi_theta(index: int, tau: mpc) -> mpc:
    """Jacobi theta_index(0 | tau) with nome e^{i pi tau}, index in {2, 3, 4}."""
    factor = mp.mpc(1)
    for _ in range(10000):
        n = int(mp.floor(tau.real + mp.mpf(0.5)))
        if n:
            tau = tau - n
            if index == 2:
                factor *= mp.expjpi(mp.mpf(n) / 4)
            elif n % 2:
                index = 7 - index  # theta3 <-> theta4 under tau -> tau + 1
        if abs(tau) < 1:
            sigma = -1 / tau
            # theta_i(tau) = theta_i(-1/sigma) = sqrt(sigma/i) theta_{pi(i)}(sigma)
            factor *= mp.sqrt(sigma / mp.j)
            index = {2: 4, 3: 3, 4: 2}[index]
            tau = sigma
        else:
            return factor * mp.jtheta(index, 0, mp.expjpi(tau))
    raise DomainError("theta reduction did not terminate")


def eval_theta(z: mpc) -> mpc:
    """theta(z) = sum_n q^{n^2} = theta_3(0 | 2z)."""
    z = _check_upper(z)
    if z.imag >= mp.mpf(0.2):
        return mp.jtheta(3, 0, _q(z))
    return _jacobi_theta(3, 2 * z)


@dataclass(frozen=True)
class SeriesValue:
    """A truncated series value together with a bound on the neglected tail."""

    value: mpc
    error: mpf


@dataclass(frozen=True)
class Growth:
    """Coefficient bound |a(n)| <= constant * exp(rate * sqrt(n)) for n > 0."""

    constant: mpf
    rate: mpf

    def bound(self, n: int) -> mpf:
        return mp.mpf(self.constant) * mp.exp(mp.mpf(self.rate) * mp.sqrt(n))


def tail_bound(growth: Growth, y: mpf, start: int, step: int = 1) -> mpf:
    """Bound on sum_{n >= start} |a(n)| e^{-2 pi n y}."""
    if mp.mpf(growth.constant) == 0:
        return mp.mpf(0)
    total = mp.mpf(0)
    eps = mp.mpf(10) ** (-mp.dps - 5)
    n = max(start, 1)
    previous = None
    while True:
        term = growth.bound(n) * mp.exp(-2 * mp.pi * n * y)
        total += term
        if previous is not None and term < previous and term < eps * max(total, eps):
            # remaining terms decay at least geometrically with this ratio
            ratio = term / previous
            return total + term * ratio / (1 - ratio)
        previous = term
        n += step
        if n > start + 10 ** 7:
            return mp.inf


def required_cutoff(growth: Growth, y: mpf, tolerance: mpf) -> int:
    """Smallest D with tail_bound(growth, y, D + 1) <= tolerance (doubling search)."""
    if y <= 0:
        raise DomainError("Convergence height must be positive")
    hi = 1
    while tail_bound(growth, y, hi + 1) > tolerance:
        hi *= 2
        if hi > 10 ** 7:
            return hi
    lo = hi // 2
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if tail_bound(growth, y, mid + 1) > tolerance:
            lo = mid
        else:
            hi = mid
    return hi


@dataclass
class FormSpec:
    """A modular form known through its Fourier coefficients.

    ``coefficient(n)`` returns a(n); ``n_max`` is the largest index the
    accessor can serve (None for unbounded). ``evaluator`` evaluates the form
    directly when a closed evaluation exists.
    """

    label: str
    weight: mpf
    level: int
    n_min: int
    coefficient: Coefficient
    n_max: Optional[int] = None
    growth: Growth = field(default_factory=lambda: Growth(mp.mpf(1), mp.mpf(0)))
    evaluator: Optional[Evaluator] = None

    def a(self, n: int) -> mpc:
        if n < self.n_min:
            return mp.mpc(0)
        if self.n_max is not None and n > self.n_max:
            raise InsufficientDataError(
                f"Coefficient a({n}) of {self.label} is not available (max {self.n_max})",
                required=n,
            )
        return mp.mpc(self.coefficient(n))

    def require(self, n: int) -> None:
        if self.n_max is not None and n > self.n_max:
            raise InsufficientDataError(
                f"{self.label} needs coefficients up to {n}, only {self.n_max} available",
                required=n,
            )

    def evaluate(self, z: mpc) -> mpc:
        if self.evaluator is not None:
            return self.evaluator(_check_upper(z))
        return self.evaluate_series(z).value

    def evaluate_series(self, z: mpc) -> SeriesValue:
        """Sum the q-expansion, with a tail bound from the growth model."""
        z = _check_upper(z)
        tolerance = mp.mpf(10) ** (-mp.dps + 5)
        cutoff = required_cutoff(self.growth, z.imag, tolerance)
        if self.n_max is not None and cutoff > self.n_max:
            raise InsufficientDataError(
                f"{self.label} at Im z = {mp.nstr(z.imag, 5)} needs coefficients "
                f"up to {cutoff}, only {self.n_max} available",
                required=cutoff,
            )
        q = _q(z)
        total = mp.fsum(self.a(n) * q ** n for n in range(self.n_min, cutoff + 1))
        return SeriesValue(total, tail_bound(self.growth, z.imag, cutoff + 1))

    def constant_term(self) -> mpc:
        return self.a(0)

    def is_zero(self) -> bool:
        top = self.n_max if self.n_max is not None else self.n_min + 50
        return all(self.a(n) == 0 for n in range(self.n_min, top + 1))


def _series_power(base: List[int], exponent: int, size: int) -> List[int]:
    result = [1] + [0] * (size - 1)
    for _ in range(exponent):
        result = [
            sum(result[i] * base[n - i] for i in range(n + 1)) for n in range(size)
        ]
    return result


def _eta24_product(size: int) -> List[int]:
    """Coefficients of prod (1 - q^n)^24 up to q^(size-1)."""
    prod = [1] + [0] * (size - 1)
    for n in range(1, size):
        for _ in range(24):
            for i in range(size - 1, n - 1, -1):
                prod[i] -= prod[i - n]
    return prod


def delta_coefficients(nmax: int) -> List[int]:
    """Ramanujan tau(n) for 0 <= n <= nmax (tau(0) = 0)."""
    prod = _eta24_product(max(nmax, 1))
    return [0] + prod[: nmax]


def j1_coefficients(nmax: int) -> List[int]:
    """Exact coefficients [a(-1), a(0), ..., a(nmax)] of j - 744."""
    if nmax < 0:
        raise InvalidArgumentError(f"nmax must be non-negative, got {nmax}")
    size = nmax + 2
    e4 = [1] + [240 * int(divisor_sigma(n, 3)) for n in range(1, size)]
    e4_cubed = _series_power(e4, 3, size)
    prod = _eta24_product(size)
    inverse = [1] + [0] * (size - 1)
    for n in range(1, size):
        inverse[n] = -sum(prod[i] * inverse[n - i] for i in range(1, n + 1))
    coeffs = [sum(e4_cubed[i] * inverse[n - i] for i in range(n + 1)) for n in range(size)]
    coeffs[1] -= 744
    return coeffs


def g1_coefficients(nmax: int) -> List[int]:
    """Exact coefficients [c(-1), c(0), ..., c(nmax)] of -theta1(z) E4(4z) / eta(4z)^6.

    This is -q^{-1} + 2 - 248 q^3 + 492 q^4 - ..., whose q^{|d|} coefficient
    is the trace of j1 over discriminant d < 0.
    """
    if nmax < 0:
        raise InvalidArgumentError(f"nmax must be non-negative, got {nmax}")
    size = nmax + 2
    quarter = size // 4 + 1
    # series in x = q^4
    e4 = [1] + [240 * int(divisor_sigma(n, 3)) for n in range(1, quarter)]
    prod = [1] + [0] * (quarter - 1)
    for n in range(1, quarter):
        for _ in range(6):
            for i in range(quarter - 1, n - 1, -1):
                prod[i] -= prod[i - n]
    inverse = [1] + [0] * (quarter - 1)
    for n in range(1, quarter):
        inverse[n] = -sum(prod[i] * inverse[n - i] for i in range(1, n + 1))
    ratio = [sum(e4[i] * inverse[n - i] for i in range(n + 1)) for n in range(quarter)]
    spread = [0] * size
    for n, value in enumerate(ratio):
        if 4 * n < size:
            spread[4 * n] = value
    theta1 = [0] * size
    for m in range(isqrt(size - 1) + 1):
        theta1[m * m] += (1 if m == 0 else 2) * (-1) ** m
    return [
        -sum(theta1[i] * spread[n - i] for i in range(n + 1)) for n in range(size)
    ]


def eval_w_j1(z: mpc) -> mpc:
    """-theta1(z) E4(4z) / eta(4z)^6 with theta1(z) = theta(z + 1/2)."""
    z = _check_upper(z)
    return -eval_theta(z + mp.mpf(0.5)) * eval_e4(4 * z) / eval_eta(4 * z) ** 6


class _IntegerSeries:
    """Lazily extended exact coefficient list for j1 and its polynomials."""

    def __init__(self, builder: Callable[[int], List[int]], offset: int):
        self.builder = builder
        self.offset = offset
        self.values: List[int] = []

    def __call__(self, n: int) -> int:
        index = n + self.offset
        if index < 0:
            return 0
        if index >= len(self.values):
            self.values = self.builder(max(2 * index, 32))
        return self.values[index]


def _j2_coefficients(nmax: int) -> List[int]:
    """Coefficients [a(-2), ..., a(nmax)] of j1^2 - 393768."""
    base = j1_coefficients(nmax + 1)
    size = nmax + 3
    out = [sum(base[i] * base[n - i] for i in range(n + 1)) for n in range(size)]
    out[2] -= 393768
    return out


def _theta_power_coefficients(exponent: int) -> Coefficient:
    cache: Dict[int, List[int]] = {}

    def coefficient(n: int) -> int:
        if n < 0:
            return 0
        size = len(cache.get(exponent, []))
        if n >= size:
            size = max(2 * n + 1, 64)
            theta = [0] * size
            for m in range(isqrt(size - 1) + 1):
                theta[m * m] += 1 if m == 0 else 2
            cache[exponent] = _series_power(theta, exponent, size)
        return cache[exponent][n]

    return coefficient


def _theta_coefficient(n: int) -> int:
    if n < 0:
        return 0
    if n == 0:
        return 1
    return 2 if isqrt(n) ** 2 == n else 0


_REGISTRY: Dict[str, Callable[[], FormSpec]] = {
    "j1": lambda: FormSpec(
        "j1", mp.mpf(0), 1, -1, _IntegerSeries(j1_coefficients, 1),
        growth=Growth(mp.mpf(1), 4 * mp.pi), evaluator=eval_j1,
    ),
    "j2": lambda: FormSpec(
        "j2", mp.mpf(0), 1, -2, _IntegerSeries(_j2_coefficients, 2),
        growth=Growth(mp.mpf(2), 4 * mp.pi * mp.sqrt(2)),
        evaluator=lambda z: eval_j1(z) ** 2 - 393768,
    ),
    "zero": lambda: FormSpec(
        "zero", mp.mpf(0), 1, 0, lambda n: 0, growth=Growth(mp.mpf(0), mp.mpf(0)),
        evaluator=lambda z: mp.mpc(0),
    ),
    "theta": lambda: FormSpec(
        "theta", mp.mpf(0.5), 4, 0, _theta_coefficient,
        growth=Growth(mp.mpf(2), mp.mpf(0)), evaluator=eval_theta,
    ),
    "theta3": lambda: FormSpec(
        "theta3", mp.mpf(1.5), 4, 0, _theta_power_coefficients(3),
        growth=Growth(mp.mpf(12), mp.mpf(2)), evaluator=lambda z: eval_theta(z) ** 3,
    ),
    "theta4": lambda: FormSpec(
        "theta4", mp.mpf(2), 4, 0, _theta_power_coefficients(4),
        growth=Growth(mp.mpf(24), mp.mpf(3)), evaluator=lambda z: eval_theta(z) ** 4,
    ),
    "g1": lambda: FormSpec(
        "g1", mp.mpf(1.5), 4, -1, _IntegerSeries(g1_coefficients, 1),
        growth=Growth(mp.mpf(10), mp.pi), evaluator=eval_w_j1,
    ),
    "delta": lambda: FormSpec(
        "delta", mp.mpf(12), 1, 1, _IntegerSeries(delta_coefficients, 0),
        growth=Growth(mp.mpf(10000), mp.mpf(4)), evaluator=eval_delta,
    ),
}


def available_forms() -> List[str]:
    return sorted(_REGISTRY)


def get_form(label: str) -> FormSpec:
    """Look up a registered form by label ("j1", "theta", ...).

    Labels of the form "W(<label>)" need a trace table and are built by
    :func:`singular_traces.traces.w_form`.
    """
    try:
        return _REGISTRY[label]()
    except KeyError:
        raise InvalidArgumentError(
            f"Unknown form '{label}'. Available: {', '.join(available_forms())}"
        ) from None


def form_from_coefficients(
    label: str,
    weight: float,
    coefficients: Dict[int, complex],
    level: int = 4,
) -> FormSpec:
    """A form given by finitely many coefficients (all others zero)."""
    table = {int(n): mp.mpc(v) for n, v in coefficients.items()}
    n_min = min(table) if table else 0
    biggest = max((abs(v) for v in table.values()), default=mp.mpf(0))

    def coefficient(n: int) -> mpc:
        return table.get(n, mp.mpc(0))

    return FormSpec(
        label, mp.mpf(weight), level, n_min, coefficient,
        growth=Growth(biggest, mp.mpf(0)),
        evaluator=lambda z: mp.fsum(v * _q(z) ** n for n, v in table.items()),
    )


class TraceTableLike(Protocol):
    """What eval_g1 needs from a trace table."""

    def shadow_coefficients(self) -> Dict[int, mpc]:
        ...

    def negative_growth(self) -> Growth:
        ...


def eval_g1(z: mpc, table: TraceTableLike) -> SeriesValue:
    """g1 = W(j1) summed from the shadow coefficients of a table of j1 traces.

    The polar and constant coefficients come from the complementary traces
    and Tr_0 of the table like all others. Raises InsufficientDataError (with
    the needed cutoff) when the table does not reach far enough for the
    requested height.
    """
    z = _check_upper(z)
    coefficients = table.shadow_coefficients()
    top = max(coefficients, default=0)
    growth = table.negative_growth()
    tolerance = mp.mpf(10) ** (-mp.dps + 5)
    cutoff = required_cutoff(growth, z.imag, tolerance)
    if cutoff > top:
        raise InsufficientDataError(
            f"g1 at Im z = {mp.nstr(z.imag, 5)} needs traces down to d = -{cutoff}",
            required=cutoff,
        )
    q = _q(z)
    total = mp.fsum(value * q ** n for n, value in coefficients.items())
    return SeriesValue(total, tail_bound(growth, z.imag, top + 1))
