"""
Regularized twisted L-functions of weakly holomorphic forms on Gamma_0(4N)
and the regularized Eichler integrals they are built from.

Conventions: a form g of weight k has the expansion sum b(n) q^n at i*infinity
and, at a cusp gamma(i*infinity), (cz+d)^{-k} g(gamma z) =
sum b_gamma(n) e^{2 pi i (n + kappa) z / lambda}. Complex powers are principal
(arg in (-pi, pi]); matrices are normalized to c > 0 before any power is taken.
Negative-index terms n^{-s} Gamma(s, n x) of L^reg take the mean of their
continuations above and below the cut, which keeps L^reg at r and -r complex
conjugate for real coefficients and real s.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Optional, Tuple

from mpmath import mp, mpc, mpf

from .arith import ONE, Matrix2Z, UnitComplex, chi_theta, cusp_matrix
from .exceptions import (
    DomainError,
    InsufficientDataError,
    InvalidArgumentError,
    PoleError,
    UnsupportedInputError,
)
from .logging_config import get_logger
from .modeval import FormSpec, Growth, SeriesValue, required_cutoff, tail_bound
from .serialization import complex_dict, complex_from_dict, dec
from .specfun import A_func, power, scaled_inc_gamma

logger = get_logger(__name__)

SAFETY = mp.mpf("0.95")


def _tolerance() -> mpf:
    return mp.mpf(10) ** (-mp.dps - 5)


def normalized(gamma: Matrix2Z) -> Matrix2Z:
    """Representative of +-gamma with c > 0, or c = 0 and d > 0."""
    if gamma.c < 0 or (gamma.c == 0 and gamma.d < 0):
        return -gamma
    return gamma


def cusp_multiplier(weight: mpf, level: int, gamma: Matrix2Z) -> UnitComplex:
    """chi_theta(gamma)^{2k}, the factor with (cz+d)^{-k} g(gamma z) = chi g(z).

    Level one forms of even weight carry the trivial multiplier on all of
    SL2(Z); everything else needs gamma in Gamma_0(4N).
    """
    two_k = int(mp.nint(2 * mp.mpf(weight)))
    if level == 1 and two_k % 4 == 0:
        return ONE
    modulus = max(level, 4)
    if gamma.c % modulus:
        raise UnsupportedInputError(
            f"{gamma} is not in Gamma_0({modulus}); an expansion at this cusp "
            "has to be computed numerically"
        )
    return chi_theta(normalized(gamma)) ** two_k


@dataclass
class CuspExpansion:
    """Fourier data of (cz+d)^{-k} g(gamma z)."""

    gamma: Matrix2Z
    weight: mpf
    coefficient: Callable[[int], mpc]
    n_min: int
    kappa: mpf = mp.zero
    lam: int = 1
    n_max: Optional[int] = None
    growth: Growth = field(default_factory=lambda: Growth(mp.mpf(1), mp.mpf(0)))
    error: mpf = mp.zero

    def b(self, n: int) -> mpc:
        if n < self.n_min:
            return mp.mpc(0)
        if self.n_max is not None and n > self.n_max:
            raise InsufficientDataError(
                f"Coefficient b({n}) at {self.gamma} is not available (max {self.n_max})",
                required=n,
            )
        return mp.mpc(self.coefficient(n))

    @property
    def has_constant_term(self) -> bool:
        return self.kappa == 0 and self.b(0) != 0

    @classmethod
    def at_infinity(cls, g: FormSpec) -> "CuspExpansion":
        return cls(
            Matrix2Z.identity(), g.weight, g.a, g.n_min,
            n_max=g.n_max, growth=g.growth,
        )

    @classmethod
    def from_multiplier(cls, g: FormSpec, gamma: Matrix2Z) -> "CuspExpansion":
        """b_gamma(n) = chi^{2k}(gamma) b(n), kappa = 0, lambda = 1."""
        gamma = normalized(gamma)
        factor = cusp_multiplier(g.weight, g.level, gamma).to_mpc()
        return cls(
            gamma, g.weight, lambda n: factor * g.a(n), g.n_min,
            n_max=g.n_max, growth=g.growth,
        )

    def value(self, z: mpc, cutoff: Optional[int] = None) -> mpc:
        """Resynthesize (cz+d)^{-k} g(gamma z) from the stored coefficients."""
        z = mp.mpc(z)
        top = cutoff if cutoff is not None else self.n_max
        if top is None:
            top = required_cutoff(self.growth, SAFETY * z.imag / self.lam, _tolerance())
        return mp.fsum(
            self.b(n) * mp.expj(2 * mp.pi * (n + self.kappa) * z / self.lam)
            for n in range(self.n_min, top + 1)
        )

    def to_dict(self, digits: Optional[int] = None) -> Dict[str, Any]:
        top = self.n_max if self.n_max is not None else self.n_min + 32
        return {
            "gamma": list(self.gamma.as_tuple()),
            "weight": dec(self.weight, 10),
            "kappa": dec(self.kappa, digits),
            "lambda": self.lam,
            "error": dec(self.error, 10),
            "coefficients": [
                dict(complex_dict(self.b(n), digits), n=n)
                for n in range(self.n_min, top + 1)
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CuspExpansion":
        try:
            table = {int(e["n"]): complex_from_dict(e) for e in data["coefficients"]}
            gamma = Matrix2Z(*(int(x) for x in data["gamma"]))
            biggest = max((abs(v) for v in table.values()), default=mp.mpf(0))
            return cls(
                gamma,
                mp.mpf(data["weight"]),
                lambda n: table.get(n, mp.mpc(0)),
                min(table) if table else 0,
                kappa=mp.mpf(data.get("kappa", "0")),
                lam=int(data.get("lambda", 1)),
                n_max=max(table) if table else 0,
                growth=Growth(biggest, mp.mpf(0)),
                error=mp.mpf(data.get("error", "0")),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidArgumentError(f"Malformed cusp expansion: {e}") from e


@dataclass
class LregQuery:
    """Everything L^reg_r(g, s) depends on; r = gamma(i*infinity)."""

    g: FormSpec
    expansion: CuspExpansion
    s: mpc
    t: mpf = mp.one

    def __post_init__(self) -> None:
        self.s = mp.mpc(self.s)
        self.t = mp.mpf(self.t)
        if self.t <= 0:
            raise InvalidArgumentError("The horocycle parameter t must be positive")
        if self.expansion.gamma.c <= 0:
            raise InvalidArgumentError(
                f"{self.expansion.gamma} does not map i*infinity to a rational cusp "
                "(normalize to c > 0)"
            )

    @classmethod
    def at_rational(
        cls,
        g: FormSpec,
        a: int,
        c: int,
        s: mpc,
        t: mpf = mp.one,
        gamma: Optional[Matrix2Z] = None,
    ) -> "LregQuery":
        gamma = normalized(gamma) if gamma is not None else cusp_matrix(a, c)
        if Fraction(gamma.a, gamma.c) != Fraction(a, c):
            raise InvalidArgumentError(f"{gamma} does not map i*infinity to {a}/{c}")
        return cls(g, CuspExpansion.from_multiplier(g, gamma), s, t)

    @property
    def gamma(self) -> Matrix2Z:
        return self.expansion.gamma

    @property
    def r(self) -> Fraction:
        return Fraction(self.gamma.a, self.gamma.c)

    @property
    def weight(self) -> mpf:
        return mp.mpf(self.g.weight)


def lreg_cutoffs(query: LregQuery) -> Tuple[int, int]:
    """Truncation points for the sum at i*infinity and the sum at the cusp."""
    c = query.gamma.c
    exp = query.expansion
    tol = _tolerance()
    n_inf = required_cutoff(query.g.growth, SAFETY * query.t, tol)
    n_cusp = required_cutoff(exp.growth, SAFETY / (c * c * query.t * exp.lam), tol)
    logger.debug("L^reg cutoffs at r = %s: %d (infinity), %d (cusp)", query.r, n_inf, n_cusp)
    return n_inf, n_cusp


def _check_poles(query: LregQuery) -> None:
    s = query.s
    if s == 0 and query.g.a(0) != 0:
        raise PoleError("L^reg(g, s) is not defined at s = 0 when b(0) != 0")
    if s == query.weight and query.expansion.has_constant_term:
        raise PoleError(
            f"L^reg(g, s) has a pole at s = k = {mp.nstr(query.weight, 5)}"
        )


def lreg_eval(query: LregQuery) -> mpc:
    """Regularized twisted L-function L^reg_r(g, s).

    Four pieces: the incomplete-gamma sum at i*infinity cut at height t, the
    constant term there, the dual sum at the cusp r (through gamma) and its
    constant term. The value does not depend on t or on the choice of gamma.
    """
    _check_poles(query)
    g, exp = query.g, query.expansion
    s, t, k = query.s, query.t, query.weight
    a, c, d = query.gamma.a, query.gamma.c, query.gamma.d
    n_inf, n_cusp = lreg_cutoffs(query)
    g.require(n_inf)
    if exp.n_max is not None and n_cusp > exp.n_max:
        raise InsufficientDataError(
            f"Expansion at {query.gamma} needs coefficients up to {n_cusp}, "
            f"only {exp.n_max} available",
            required=n_cusp,
        )
    r = mp.mpf(a) / c
    two_pi = 2 * mp.pi
    rgamma = mp.rgamma(s)

    head = mp.fsum(
        g.a(n) * mp.expjpi(2 * n * r) * scaled_inc_gamma(n, s, two_pi * t)
        for n in range(g.n_min, n_inf + 1)
        if n != 0 and g.a(n) != 0
    )
    head *= rgamma
    head -= power(two_pi, s) * g.a(0) * power(t, s) * mp.rgamma(s + 1)

    ks = k - s
    shift = mp.mpf(-d) / c
    dual_terms = []
    for n in range(exp.n_min, n_cusp + 1):
        nu = (n + exp.kappa) / exp.lam
        if nu == 0:
            continue
        coeff = exp.b(n)
        if coeff == 0:
            continue
        dual_terms.append(
            coeff
            * mp.expjpi(2 * nu * shift)
            * scaled_inc_gamma(nu, ks, two_pi / (c * c * t))
        )
    i_k = mp.expjpi(k / 2)
    dual = i_k * power(c, -k) * power(two_pi, 2 * s - k) * power(c * c, ks) * rgamma
    dual *= mp.fsum(dual_terms)
    if exp.kappa == 0 and exp.b(0) != 0:
        dual -= (
            i_k * power(two_pi, s) * exp.b(0) * power(t, s - k)
            * power(c, -k) / ks * rgamma
        )
    value = head + dual
    logger.debug(
        "L^reg_%s(%s, %s) = %s (t = %s)",
        query.r, g.label, mp.nstr(s, 8), mp.nstr(value, 20), mp.nstr(t, 5),
    )
    return value


def completed(query: LregQuery) -> mpc:
    """Gamma(s) (2 pi)^{-s} L^reg_r(g, s)."""
    return mp.gamma(query.s) * power(2 * mp.pi, -query.s) * lreg_eval(query)


def dual_matrix(gamma: Matrix2Z) -> Matrix2Z:
    """-gamma^{-1}, which has the same c > 0 and maps i*infinity to -d/c."""
    gamma = normalized(gamma)
    return Matrix2Z(-gamma.d, gamma.b, gamma.c, -gamma.a)


def lreg_funeq_residual(g: FormSpec, gamma: Matrix2Z, s: mpc, t: mpf = mp.one) -> mpc:
    """Left minus right side of the functional equation relating r = a/c to -d/c.

    Gamma(s)(2pi)^{-s} L_r(s) = i^k c^k (c^2)^{-s} chi^{2k}(gamma)
    Gamma(k-s)(2pi)^{-(k-s)} L_{-d/c}(k-s).
    """
    gamma = normalized(gamma)
    if gamma.c == 0:
        raise InvalidArgumentError("The functional equation needs c != 0")
    s = mp.mpc(s)
    k = mp.mpf(g.weight)
    for point in (s, k - s):
        if point == 0 or point == k:
            raise PoleError(f"Functional equation evaluated at a pole (s = {mp.nstr(s, 5)})")
    c = gamma.c
    left = completed(LregQuery(g, CuspExpansion.from_multiplier(g, gamma), s, t))
    right = completed(
        LregQuery(g, CuspExpansion.from_multiplier(g, dual_matrix(gamma)), k - s, t)
    )
    factor = (
        mp.expjpi(k / 2) * power(c, k) * power(c * c, -s)
        * cusp_multiplier(g.weight, g.level, gamma).to_mpc()
    )
    return left - factor * right


def lreg_integral_check(g: FormSpec, gamma: Matrix2Z, s: mpc) -> Tuple[mpc, mpc]:
    """(quadrature, series) for (1/Gamma(s)) (2 pi / i)^s int_r^{i oo} g(tau)(tau - r)^{s-1} dtau.

    Only cusp forms (no constant terms at either end) have a convergent integral.
    """
    query = LregQuery(g, CuspExpansion.from_multiplier(g, gamma), s)
    if g.a(0) != 0 or query.expansion.has_constant_term or g.n_min < 0:
        raise UnsupportedInputError(f"{g.label} is not a cusp form")
    c = query.gamma.c
    r = mp.mpf(query.gamma.a) / c
    s = query.s
    integral = mp.quad(
        lambda y: g.evaluate(mp.mpc(r, y)) * power(y, s - 1),
        [0, mp.mpf(1) / (c * c), 1, mp.inf],
    )
    quadrature = power(2 * mp.pi, s) * mp.rgamma(s) * integral
    return quadrature, lreg_eval(query)


def _check_points(z1: mpc, z2: mpc) -> Tuple[mpc, mpc]:
    z1 = mp.mpc(z1)
    z2 = mp.mpc(z2)
    if z1.imag <= 0:
        raise DomainError(f"Base point {mp.nstr(z1, 8)} is not in the upper half-plane")
    if z1.imag + z2.imag <= 0:
        raise DomainError("Eichler series needs Im z1 + Im z2 > 0")
    return z1, z2


def eichler_reg_series(
    g: FormSpec, z1: mpc, z2: mpc, s: mpc, cutoff: Optional[int] = None
) -> SeriesValue:
    """Regularized int_{z1}^{i oo} g(tau)(tau - conj(z2))^s dtau as an A-kernel series.

    (i/2pi)^{s+1} sum_{n != 0} b(n) n^{-(s+1)} e^{2 pi i n x1} e^{2 pi n y2}
    A(2 pi n (y1+y2), 2 pi n (x2-x1), s) - b(0) i^{s+1} (y1+y2+i(x2-x1))^{s+1}/(s+1).
    Terms decay like e^{-2 pi n y1}.
    """
    z1, z2 = _check_points(z1, z2)
    s = mp.mpc(s)
    if s == -1:
        raise PoleError("Eichler series has a pole at s = -1")
    x1, y1 = z1.real, z1.imag
    x2, y2 = z2.real, z2.imag
    top = cutoff if cutoff is not None else required_cutoff(g.growth, SAFETY * y1, _tolerance())
    g.require(top)
    two_pi = 2 * mp.pi
    total = mp.fsum(
        g.a(n)
        * power(n, -(s + 1))
        * mp.expjpi(2 * n * x1)
        * mp.exp(two_pi * n * y2)
        * A_func(two_pi * n * (y1 + y2), two_pi * n * (x2 - x1), s)
        for n in range(g.n_min, top + 1)
        if n != 0 and g.a(n) != 0
    )
    total *= power(mp.j / two_pi, s + 1)
    if g.a(0) != 0:
        w = mp.mpc(y1 + y2, x2 - x1)
        total -= g.a(0) * power(mp.j, s + 1) * power(w, s + 1) / (s + 1)
    scale = (
        2 * mp.e ** (mp.pi * abs(s.imag)) * abs(power(two_pi, -(s + 1)))
        * max(1, abs(mp.mpc(y1 + y2, x2 - x1)) * two_pi) ** max(s.real, 0)
    )
    error = scale * tail_bound(g.growth, SAFETY * y1, top + 1)
    return SeriesValue(total, error)


def eichler_cusp_series(g: FormSpec, delta: Matrix2Z, z1: mpc, z2: mpc) -> mpc:
    """Regularized int_{z1}^{delta(i oo)} g(tau)(tau - conj(z2))^{k-2} dtau.

    Moves the cusp to i*infinity: chi^{2k}(delta) (-c conj(z2) + a)^{k-2} times
    the series at delta^{-1} z1, delta^{-1} z2.
    """
    delta = normalized(delta)
    z1, z2 = _check_points(z1, z2)
    k = mp.mpf(g.weight)
    if delta.c == 0:
        return eichler_reg_series(g, z1, z2, k - 2).value
    inverse = delta.inverse()
    w1 = inverse.act(z1)
    w2 = inverse.act(z2)
    factor = cusp_multiplier(g.weight, g.level, delta).to_mpc()
    factor *= power(-delta.c * mp.conj(z2) + delta.a, k - 2)
    return factor * eichler_reg_series(g, w1, w2, k - 2).value


def _cusp_piece(g: FormSpec, cusp: Optional[Fraction], z1: mpc, z: mpc) -> mpc:
    if cusp is None:
        return eichler_cusp_series(g, Matrix2Z.identity(), z1, z)
    return eichler_cusp_series(g, cusp_matrix(cusp.numerator, cusp.denominator), z1, z)


def two_cusp_integral(
    g: FormSpec,
    r1: Optional[Fraction],
    r2: Optional[Fraction],
    z: mpc,
    z1: mpc = mp.mpc(0, 1),
) -> mpc:
    """Regularized int_{r1}^{r2} g(tau)(tau - conj(z))^{k-2} dtau; None is i*infinity.

    Computed as -[z1, r1] + [z1, r2]; the base point z1 drops out.
    """
    return -_cusp_piece(g, r1, z1, z) + _cusp_piece(g, r2, z1, z)


def fminus_from_shadow(g: FormSpec, z: mpc) -> mpc:
    """Nonholomorphic part f^-(z) of a form of weight 2-k whose shadow is g."""
    k = mp.mpf(g.weight)
    integral = eichler_reg_series(g, z, z, k - 2).value
    return -power(mp.mpc(0, -2), -(k - 1)) * mp.conj(integral)


def period_function(
    g: FormSpec, gamma: Matrix2Z, z: mpc, z1: mpc = mp.mpc(0, 1)
) -> mpc:
    """(f^- - f^-|_{2-k} gamma)(z) for gamma in Gamma_0(4N)."""
    gamma = normalized(gamma)
    if gamma.c == 0:
        return mp.mpc(0)
    k = mp.mpf(g.weight)
    start = Fraction(-gamma.d, gamma.c)
    integral = two_cusp_integral(g, start, None, z, z1)
    return -power(mp.mpc(0, -2), -(k - 1)) * mp.conj(integral)
