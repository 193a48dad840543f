"""
Special-function kernels: the incomplete gamma function on the (-pi, pi]
branch, the A(x, y, s) kernel of regularized Eichler integrals, B_k(x) and
the exponential integral EI(w).
"""

from dataclasses import dataclass
from typing import Union

from mpmath import mp, mpc, mpf

from .exceptions import PoleError
from .logging_config import get_logger

logger = get_logger(__name__)

Number = Union[int, float, mpf, mpc]


@dataclass(frozen=True)
class BranchedPower:
    """base**exponent with arg(base) taken in (-pi, pi]."""

    base: Number
    exponent: Number

    def value(self) -> mpc:
        base = mp.mpc(self.base)
        if base == 0:
            if mp.re(self.exponent) > 0:
                return mp.mpc(0)
            raise PoleError(f"0 raised to exponent {self.exponent}")
        # mpmath's log already uses the principal argument in (-pi, pi]
        return mp.exp(mp.mpc(self.exponent) * mp.log(base))


def power(base: Number, exponent: Number) -> mpc:
    return BranchedPower(base, exponent).value()


def _is_nonpositive_integer(s: mpc) -> bool:
    s = mp.mpc(s)
    return s.imag == 0 and s.real <= 0 and s.real == int(s.real)


def inc_gamma(s: Number, x: Number) -> mpc:
    """Upper incomplete gamma Gamma(s, x) for real x.

    Negative x is continued along arg(x) = +pi, i.e. x^s = |x|^s e^{i pi s}.
    """
    s = mp.mpc(s)
    x = mp.mpf(x)
    if x > 0:
        return mp.mpc(mp.gammainc(s, x))
    if x == 0:
        if s.real <= 0:
            raise PoleError(f"Gamma(s, 0) diverges for Re s = {mp.nstr(s.real, 5)} <= 0")
        return mp.mpc(mp.gamma(s))
    if _is_nonpositive_integer(s):
        return _inc_gamma_negative_integer(int(s.real), x)
    # Gamma(s) - gamma(s, x), gamma(s, x) = x^s 1F1(s; s+1; -x) / s
    xs = power(-x, s) * mp.expjpi(s)
    return mp.gamma(s) - xs * mp.hyp1f1(s, s + 1, -x) / s


def _inc_gamma_negative_integer(n: int, x: mpf) -> mpc:
    # Gamma(0, x) = -Ei(|x|) - i pi on the upper side of the cut
    value = -mp.ei(-x) - mp.j * mp.pi
    xs_log = mp.log(-x) + mp.j * mp.pi
    for m in range(0, n, -1):
        # Gamma(m-1, x) = (Gamma(m, x) - x^(m-1) e^{-x}) / (m-1)
        value = (value - mp.exp((m - 1) * xs_log) * mp.exp(-x)) / (m - 1)
    return mp.mpc(value)


def scaled_inc_gamma(n: Number, s: Number, c: Number) -> mpc:
    """n^{-s} Gamma(s, n c) for real n != 0 and c > 0.

    For n < 0 the continuations of the product above and below the cut
    differ by 2 pi i |n|^{-s} / Gamma(1 - s); their mean is returned. It is
    real for real s, and at s = 0 it is the principal value EI(n c).
    """
    n = mp.mpf(n)
    s = mp.mpc(s)
    value = power(n, -s) * inc_gamma(s, n * mp.mpf(c))
    if n > 0:
        return value
    return value + mp.j * mp.pi * power(-n, -s) * mp.rgamma(1 - s)


def inc_gamma_envelope(s: Number, x: Number) -> mpf:
    """Crude bound |x|^(Re s - 1) e^{-x} times 2, valid once x > 2|s| + 2."""
    s = mp.mpc(s)
    x = mp.mpf(x)
    return 2 * mp.power(abs(x), s.real - 1) * mp.exp(-x)


def A_func(x: Number, y: Number, s: Number) -> mpc:
    """A(x, y, s) = int_x^infinity e^{-t} (t + iy)^s dt.

    For y != 0 the substitution u = t + iy gives e^{iy} Gamma(s+1, x+iy), the
    horizontal path never meeting the branch cut of u^s.
    """
    x = mp.mpf(x)
    y = mp.mpf(y)
    s = mp.mpc(s)
    if y == 0:
        return inc_gamma(s + 1, x)
    return mp.expj(y) * mp.gammainc(s + 1, mp.mpc(x, y))


def A_func_quad(x: Number, y: Number, s: Number) -> mpc:
    """Direct quadrature of A(x, y, s); only sensible for moderate x."""
    x = mp.mpf(x)
    y = mp.mpf(y)
    s = mp.mpc(s)
    tail = x + max(60, mp.dps * 3)
    body = mp.quad(lambda t: mp.exp(-t) * power(t + mp.j * y, s), mp.linspace(x, tail, 8))
    # leading term of e^{-t}(t+iy)^s integrated by parts beyond the cut
    return body + mp.exp(-tail) * power(tail + mp.j * y, s)


def B_func(k: Number, x: Number) -> mpc:
    """B_k(x) = e^{-x} int_{-2x}^infinity e^{-t} t^{-k} dt."""
    x = mp.mpf(x)
    if x == 0:
        raise PoleError("B_k(x) has a pole at x = 0")
    return mp.exp(-x) * inc_gamma(1 - mp.mpc(k), -2 * x)


def exp_int(w: Number) -> mpf:
    """EI(w) = int_w^infinity e^{-t} dt / t, principal value for w < 0."""
    w = mp.mpf(w)
    if w == 0:
        raise PoleError("EI(w) diverges at w = 0")
    if w > 0:
        return mp.e1(w)
    return -mp.ei(-w)
