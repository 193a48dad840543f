"""
Integral binary quadratic forms [a, b, c] = ax^2 + bxy + cy^2.

Exact work (reduction, class enumeration, Pell units, automorphs) is done in
integers and sympy rationals; floating point only enters at CM points and
geodesic parametrisations.
"""

from dataclasses import dataclass
from itertools import cycle
from math import gcd, isqrt
from typing import Dict, List, Tuple

from mpmath import mp, mpc, mpf
from sympy import Rational
from sympy.ntheory.continued_fraction import continued_fraction_periodic

from .arith import Matrix2Z
from .exceptions import InvalidArgumentError, UnsupportedInputError
from .logging_config import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class QuadForm:
    """Integral binary quadratic form with a level tag N (N divides a)."""

    a: int
    b: int
    c: int
    level: int = 1

    def __post_init__(self) -> None:
        if self.level < 1:
            raise InvalidArgumentError(f"Level must be positive, got {self.level}")
        if self.a % self.level != 0:
            raise InvalidArgumentError(
                f"Form {self.coefficients()} is not in Q_(d,{self.level}): N must divide a"
            )
        if self.discriminant < 0 and self.a <= 0:
            raise InvalidArgumentError(
                f"Definite forms must be positive definite, got {self.coefficients()}"
            )

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def content(self) -> int:
        return gcd(gcd(self.a, self.b), self.c)

    def coefficients(self) -> Tuple[int, int, int]:
        return (self.a, self.b, self.c)

    def primitive(self) -> "QuadForm":
        delta = self.content
        return QuadForm(self.a // delta, self.b // delta, self.c // delta)

    def act(self, m: Matrix2Z) -> "QuadForm":
        """Right action (Q o M)(x, y) = Q(alpha x + beta y, gamma x + delta y)."""
        al, be, ga, de = m.as_tuple()
        a, b, c = self.a, self.b, self.c
        return QuadForm(
            a * al * al + b * al * ga + c * ga * ga,
            2 * a * al * be + b * (al * de + be * ga) + 2 * c * ga * de,
            a * be * be + b * be * de + c * de * de,
        )

    def __neg__(self) -> "QuadForm":
        return QuadForm(-self.a, -self.b, -self.c, self.level)

    def value(self, z: mpc) -> mpc:
        """Q(z, 1)."""
        z = mp.mpc(z)
        return self.a * z * z + self.b * z + self.c

    @classmethod
    def parse(cls, text: str) -> "QuadForm":
        """Parse the literal 'a,b,c'."""
        try:
            a, b, c = (int(part) for part in text.split(","))
        except ValueError as e:
            raise InvalidArgumentError(f"Invalid form literal '{text}'") from e
        return cls(a, b, c)

    def __str__(self) -> str:
        return f"[{self.a}, {self.b}, {self.c}]"


def discriminant(form: QuadForm) -> int:
    """b^2 - 4ac."""
    return form.discriminant


def _check_discriminant(d: int) -> None:
    if d % 4 not in (0, 1):
        raise InvalidArgumentError(f"Discriminant {d} is not 0 or 1 mod 4")


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def reduce_definite(form: QuadForm) -> Tuple[QuadForm, Matrix2Z]:
    """Gauss-reduce a positive definite form.

    Returns the reduced form and M with form.act(M) equal to it.
    """
    if form.discriminant >= 0:
        raise InvalidArgumentError(f"{form} is not definite")
    q = QuadForm(form.a, form.b, form.c)
    m = Matrix2Z.identity()
    s = Matrix2Z.S()
    while True:
        n = (q.a - q.b) // (2 * q.a)
        if n:
            step = Matrix2Z.T(n)
            q, m = q.act(step), m @ step
        if q.c < q.a:
            q, m = q.act(s), m @ s
            continue
        if q.a == q.c and q.b < 0:
            q, m = q.act(s), m @ s
        break
    return QuadForm(q.a, q.b, q.c), m


def is_reduced_definite(form: QuadForm) -> bool:
    a, b, c = form.coefficients()
    if not (abs(b) <= a <= c):
        return False
    if (abs(b) == a or a == c) and b < 0:
        return False
    return True


def class_reps_definite(d: int, level: int = 1) -> List[QuadForm]:
    """One reduced representative per class of (not necessarily primitive) forms of
    discriminant d < 0.

    For level > 1 the list is filtered on N | a, which is only an approximation of
    the Gamma_0(N) orbits.
    """
    if d >= 0:
        raise InvalidArgumentError(f"Definite class enumeration needs d < 0, got {d}")
    _check_discriminant(d)
    reps: List[QuadForm] = []
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            numerator = b * b - d
            if numerator % (4 * a):
                continue
            c = numerator // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            reps.append(QuadForm(a, b, c))
        a += 1
    if level > 1:
        logger.warning(
            "Level %d class enumeration is experimental (filter on N | a)", level
        )
        reps = [QuadForm(q.a, q.b, q.c, level) for q in reps if q.a % level == 0]
    logger.debug("Discriminant %d: %d definite classes", d, len(reps))
    return reps


def stabilizer_order(form: QuadForm) -> int:
    """Order of the image of the stabilizer of a definite form in PSL2(Z)."""
    if form.discriminant >= 0:
        raise InvalidArgumentError(f"{form} is not definite")
    if form.level != 1:
        raise UnsupportedInputError("Stabilizer orders are only available at level 1")
    red, _ = reduce_definite(form)
    if red.a == red.b == red.c:
        return 3
    if red.b == 0 and red.a == red.c:
        return 2
    return 1


def cm_point(form: QuadForm) -> mpc:
    """The root (-b + sqrt(d)) / (2a) in the upper half-plane."""
    d = form.discriminant
    if d >= 0:
        raise InvalidArgumentError(f"{form} has no CM point (d = {d})")
    return mp.mpc(-form.b, mp.sqrt(-d)) / (2 * form.a)


@dataclass(frozen=True)
class PellSolution:
    """Smallest positive half-integral (t, u) with t^2 - d u^2 = 1."""

    d: int
    t: Rational
    u: Rational

    def __post_init__(self) -> None:
        if self.t ** 2 - self.d * self.u ** 2 != 1:
            raise InvalidArgumentError(f"({self.t}, {self.u}) does not solve Pell for {self.d}")

    @property
    def unit(self) -> mpf:
        """The unit t + u sqrt(d) > 1."""
        return mp.mpf(self.t.p) / self.t.q + mp.mpf(self.u.p) / self.u.q * mp.sqrt(self.d)

    @property
    def translation_length(self) -> mpf:
        """Hyperbolic displacement of the automorph along its axis."""
        return 2 * mp.log(self.unit)


def _pell_small(d: int) -> Tuple[int, int]:
    y = 1
    while True:
        x2 = 4 + d * y * y
        if is_square(x2):
            return isqrt(x2), y
        y += 1


def pell(d: int) -> PellSolution:
    """Minimal half-integral solution of t^2 - d u^2 = 1 for nonsquare d > 0."""
    if d <= 0 or d % 4 not in (0, 1) or is_square(d):
        raise InvalidArgumentError(f"Pell needs a positive nonsquare discriminant, got {d}")
    if d <= 16:
        x, y = _pell_small(d)
        return PellSolution(d, Rational(x, 2), Rational(y, 2))

    # X^2 - d Y^2 = 4 solutions (or twice a solution of the =1 equation) appear
    # among the continued fraction convergents of sqrt(d) once d > 16.
    expansion = continued_fraction_periodic(0, 1, d)
    head, period = expansion[0], expansion[1]
    p_prev, p = 1, head
    q_prev, q = 0, 1
    best = None
    terms = cycle(period)
    while best is None or q < 2 * best[1]:
        norm = p * p - d * q * q
        if norm == 4 and (best is None or Rational(q, 2) < best[1]):
            best = (Rational(p, 2), Rational(q, 2))
        elif norm == 1 and (best is None or q < best[1]):
            best = (Rational(p), Rational(q))
        term = next(terms)
        p_prev, p = p, term * p + p_prev
        q_prev, q = q, term * q + q_prev
    return PellSolution(d, best[0], best[1])


def automorph(form: QuadForm) -> Matrix2Z:
    """Generator g_Q' = (t+bu, 2cu; -2au, t-bu) of the stabilizer of Q' = Q/content."""
    d = form.discriminant
    if d <= 0:
        raise InvalidArgumentError(f"{form} is not indefinite")
    if is_square(d):
        raise UnsupportedInputError(f"{form} has square discriminant {d}; no closed geodesic")
    prim = form.primitive()
    sol = pell(prim.discriminant)
    t, u = sol.t, sol.u
    entries = [t + prim.b * u, 2 * prim.c * u, -2 * prim.a * u, t - prim.b * u]
    return Matrix2Z(*(int(x) for x in entries))


def _right_neighbor(form: QuadForm, root_floor: int) -> QuadForm:
    a, b, c = form.coefficients()
    width = 2 * abs(c)
    b_next = root_floor - ((root_floor + b) % width)
    a_next = (b_next * b_next - form.discriminant) // (4 * c)
    return QuadForm(c, b_next, a_next)


def reduced_indefinite_forms(d: int) -> List[QuadForm]:
    """All forms with 0 < b < sqrt(d) and sqrt(d) - b < 2|a| < sqrt(d) + b."""
    root = mp.sqrt(d)
    s = isqrt(d)
    forms = []
    for b in range(1, s + 1):
        if (b - d) % 2:
            continue
        ac = (b * b - d) // 4
        for a_abs in range(1, -ac + 1):
            if ac % a_abs:
                continue
            if not (root - b < 2 * a_abs < root + b):
                continue
            for a in (a_abs, -a_abs):
                forms.append(QuadForm(a, b, ac // a))
    return forms


def class_reps_indefinite(d: int) -> List[QuadForm]:
    """One representative per proper class, the lexicographically least form of each
    cycle of reduced forms."""
    if d <= 0 or is_square(d):
        raise UnsupportedInputError(f"Indefinite class enumeration needs nonsquare d > 0, got {d}")
    _check_discriminant(d)
    s = isqrt(d)
    remaining = set(reduced_indefinite_forms(d))
    reps: List[QuadForm] = []
    while remaining:
        start = min(remaining, key=QuadForm.coefficients)
        orbit = [start]
        current = _right_neighbor(start, s)
        while current != start:
            orbit.append(current)
            current = _right_neighbor(current, s)
        remaining.difference_update(orbit)
        reps.append(min(orbit, key=QuadForm.coefficients))
    reps.sort(key=QuadForm.coefficients)
    logger.debug("Discriminant %d: %d indefinite classes", d, len(reps))
    return reps


@dataclass(frozen=True)
class GeodesicArc:
    """One period of the geodesic a|z|^2 + b Re z + c = 0 of an indefinite form.

    Points are z(s) = m + rho (tanh s + i sech s) with s the hyperbolic arclength
    measured from the apex; the period runs over [0, length] in the direction
    given by ``orientation`` (+1 when increasing s follows the proper orientation).
    """

    form: QuadForm
    automorph: Matrix2Z
    center: mpf
    radius: mpf
    length: mpf
    orientation: int

    def point(self, s: mpf) -> mpc:
        return mp.mpc(self.center + self.radius * mp.tanh(s), self.radius * mp.sech(s))

    def derivative(self, s: mpf) -> mpc:
        sech = mp.sech(s)
        return self.radius * sech * mp.mpc(sech, -mp.tanh(s))

    @property
    def apex(self) -> mpc:
        return self.point(mp.zero)

    @property
    def end(self) -> mpc:
        """Image of the apex under the automorph."""
        return self.automorph.act(self.apex)

    def end_parameter(self) -> mpf:
        """Arclength parameter of the automorph image of the apex."""
        return mp.atanh((self.end.real - self.center) / self.radius)

    def on_geodesic(self, z: mpc) -> mpf:
        """Residual a|z|^2 + b Re z + c (zero on the geodesic)."""
        a, b, c = self.form.coefficients()
        return a * abs(z) ** 2 + b * z.real + c


def geodesic_arc(form: QuadForm) -> GeodesicArc:
    """Arc from the apex (-b + i sqrt(d)) / (2a) to its image under g_Q'."""
    d = form.discriminant
    if d <= 0:
        raise InvalidArgumentError(f"{form} is not indefinite")
    if is_square(d):
        raise UnsupportedInputError(
            f"{form} has square discriminant; its geodesic is infinite"
        )
    g = automorph(form)
    prim = form.primitive()
    length = pell(prim.discriminant).translation_length
    center = mp.mpf(-form.b) / (2 * form.a)
    radius = mp.sqrt(d) / (2 * abs(form.a))
    orientation = 1 if form.a < 0 else -1
    return GeodesicArc(form, g, center, radius, length, orientation)


def forms_by_discriminant(d_values: List[int]) -> Dict[int, List[QuadForm]]:
    """Class representatives for several discriminants at once."""
    out: Dict[int, List[QuadForm]] = {}
    for d in d_values:
        out[d] = class_reps_definite(d) if d < 0 else class_reps_indefinite(d)
    return out
