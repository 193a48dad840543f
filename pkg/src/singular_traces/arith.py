"""
Character-level arithmetic: SL2(Z) matrices, the theta multiplier and the
extended Kronecker symbol.

Roots of unity are kept exact as powers of exp(i*pi/4) so that products of
multipliers never accumulate rounding error.
"""

from dataclasses import dataclass
from math import gcd
from typing import Optional, Tuple

from mpmath import mp, mpc
from sympy.functions.combinatorial.numbers import jacobi_symbol

from .exceptions import InvalidArgumentError
from .logging_config import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class UnitComplex:
    """The eighth root of unity exp(i*pi*k/4), stored by its exponent k mod 8."""

    k: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "k", self.k % 8)

    def __mul__(self, other: "UnitComplex") -> "UnitComplex":
        return UnitComplex(self.k + other.k)

    def __pow__(self, n: int) -> "UnitComplex":
        return UnitComplex(self.k * n)

    def inverse(self) -> "UnitComplex":
        return UnitComplex(-self.k)

    def conjugate(self) -> "UnitComplex":
        return UnitComplex(-self.k)

    def to_mpc(self) -> mpc:
        """Numerical value at the current working precision."""
        exact = {0: (1, 0), 2: (0, 1), 4: (-1, 0), 6: (0, -1)}
        if self.k in exact:
            re, im = exact[self.k]
            return mp.mpc(re, im)
        return mp.expjpi(mp.mpf(self.k) / 4)

    @classmethod
    def from_sign(cls, sign: int) -> "UnitComplex":
        if sign not in (1, -1):
            raise InvalidArgumentError(f"Expected a sign +1 or -1, got {sign}")
        return cls(0 if sign == 1 else 4)

    def __str__(self) -> str:
        names = {0: "1", 2: "i", 4: "-1", 6: "-i"}
        return names.get(self.k, f"exp({self.k}*pi*i/4)")


ONE = UnitComplex(0)
I_UNIT = UnitComplex(2)


@dataclass(frozen=True)
class Matrix2Z:
    """An element (a b; c d) of SL2(Z)."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self) -> None:
        if self.a * self.d - self.b * self.c != 1:
            raise InvalidArgumentError(
                f"Matrix ({self.a} {self.b}; {self.c} {self.d}) does not have determinant 1"
            )

    @classmethod
    def identity(cls) -> "Matrix2Z":
        return cls(1, 0, 0, 1)

    @classmethod
    def T(cls, n: int = 1) -> "Matrix2Z":
        return cls(1, n, 0, 1)

    @classmethod
    def S(cls) -> "Matrix2Z":
        return cls(0, -1, 1, 0)

    def __matmul__(self, other: "Matrix2Z") -> "Matrix2Z":
        return Matrix2Z(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "Matrix2Z":
        return Matrix2Z(self.d, -self.b, -self.c, self.a)

    def __neg__(self) -> "Matrix2Z":
        return Matrix2Z(-self.a, -self.b, -self.c, -self.d)

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def act(self, z: mpc) -> mpc:
        """Mobius action z -> (az+b)/(cz+d)."""
        z = mp.mpc(z)
        return (self.a * z + self.b) / (self.c * z + self.d)

    def j(self, z: mpc) -> mpc:
        """Automorphy factor cz + d."""
        return self.c * mp.mpc(z) + self.d

    def cusp(self) -> Optional[Tuple[int, int]]:
        """The cusp gamma(i*infinity) = a/c as (a, c), or None for i*infinity."""
        if self.c == 0:
            return None
        return (self.a, self.c)

    def in_gamma0(self, level: int) -> bool:
        return self.c % level == 0

    def __str__(self) -> str:
        return f"({self.a} {self.b}; {self.c} {self.d})"


def cusp_matrix(a: int, c: int) -> Matrix2Z:
    """An SL2(Z) matrix with c > 0 mapping i*infinity to the reduced fraction a/c."""
    if c <= 0:
        raise InvalidArgumentError(f"Cusp denominator must be positive, got {c}")
    if gcd(a, c) != 1:
        raise InvalidArgumentError(f"Cusp {a}/{c} is not in lowest terms")
    d = pow(a % c, -1, c) if c > 1 else 0
    b = (a * d - 1) // c
    return Matrix2Z(a, b, c, d)


def epsilon(d: int) -> UnitComplex:
    """1 if d = 1 (mod 4), i if d = 3 (mod 4)."""
    if d % 2 == 0:
        raise InvalidArgumentError(f"epsilon is defined for odd integers only, got {d}")
    return ONE if d % 4 == 1 else I_UNIT


def kronecker_ext(c: int, d: int) -> int:
    """Extended quadratic residue symbol (c/d) for odd d.

    Jacobi symbol for d > 0; for d < 0 the sign of c decides between
    (c/|d|) and -(c/|d|). Every c has (c/+-1) = 1; (0/d) = 0 for |d| > 1.
    """
    if d % 2 == 0:
        raise InvalidArgumentError(f"Kronecker symbol needs an odd modulus, got {d}")
    if abs(d) == 1:
        return 1
    if d > 0:
        return int(jacobi_symbol(c % d, d))
    if c == 0:
        return 0
    value = int(jacobi_symbol(c % -d, -d))
    return value if c > 0 else -value


def chi_theta(gamma: Matrix2Z) -> UnitComplex:
    """Theta multiplier eps_d^{-1} (c/d) for gamma in Gamma_0(4)."""
    if gamma.c % 4 != 0:
        raise InvalidArgumentError(f"{gamma} is not in Gamma_0(4)")
    symbol = kronecker_ext(gamma.c, gamma.d)
    return epsilon(gamma.d).inverse() * UnitComplex.from_sign(symbol)


def chi_theta_via_a(gamma: Matrix2Z) -> UnitComplex:
    """The same multiplier written as eps_a^{-1} (c/a); valid for c > 0."""
    if gamma.c % 4 != 0 or gamma.c <= 0:
        raise InvalidArgumentError(f"{gamma} must lie in Gamma_0(4) with c > 0")
    return epsilon(gamma.a).inverse() * UnitComplex.from_sign(
        kronecker_ext(gamma.c, gamma.a)
    )
