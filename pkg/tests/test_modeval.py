"""
Tests for modular form evaluation and the form registry.
"""

import pytest
from mpmath import mp

from src.singular_traces.arith import Matrix2Z
from src.singular_traces.exceptions import (
    DomainError,
    InsufficientDataError,
    InvalidArgumentError,
)
from src.singular_traces.modeval import (
    FormSpec,
    Growth,
    available_forms,
    delta_coefficients,
    eval_delta,
    eval_e4,
    eval_e6,
    eval_eta,
    eval_g1,
    eval_j,
    eval_j1,
    eval_theta,
    eval_w_j1,
    form_from_coefficients,
    g1_coefficients,
    get_form,
    j1_coefficients,
    reduce_to_fundamental_domain,
    required_cutoff,
    tail_bound,
)
from src.singular_traces.traces import TraceValue

TOL = mp.mpf(10) ** -20


class TestFundamentalDomain:
    """Reduction into |x| <= 1/2, |z| >= 1."""

    def test_reduction(self) -> None:
        """The returned matrix maps z to the reduced point."""
        z = mp.mpc(3.7, 0.05)
        reduced, m = reduce_to_fundamental_domain(z)
        assert abs(reduced.real) <= 0.5 + TOL
        assert abs(reduced) >= 1 - TOL
        assert abs(m.act(z) - reduced) < TOL

    def test_lower_half_plane_rejected(self) -> None:
        """Points with Im z <= 0 raise DomainError."""
        with pytest.raises(DomainError):
            reduce_to_fundamental_domain(mp.mpc(0.2, -1))
        with pytest.raises(DomainError):
            eval_j(mp.mpc(0.3, 0))


class TestEvaluators:
    """Known values and transformation laws."""

    def test_j_special_values(self) -> None:
        """j(i) = 1728, j(rho) = 0, j(i sqrt 2) = 8000."""
        assert abs(eval_j(mp.mpc(0, 1)) - 1728) < TOL
        assert abs(eval_j(mp.mpc(-0.5, mp.sqrt(3) / 2))) < mp.mpf(10) ** -15
        assert abs(eval_j(mp.mpc(0, mp.sqrt(2))) - 8000) < mp.mpf(10) ** -15
        assert abs(eval_j1(mp.mpc(0, 1)) - 984) < TOL

    def test_j_is_invariant(self) -> None:
        """j(gamma z) = j(z)."""
        z = mp.mpc(0.13, 0.8)
        gamma = Matrix2Z(2, 1, 7, 4)
        assert abs(eval_j(gamma.act(z)) - eval_j(z)) < mp.mpf(10) ** -15 * abs(eval_j(z))

    def test_eta_at_i(self) -> None:
        """eta(i) = Gamma(1/4) / (2 pi^{3/4})."""
        expected = mp.gamma(0.25) / (2 * mp.pi ** 0.75)
        assert abs(eval_eta(mp.mpc(0, 1)) - expected) < TOL

    def test_eta_modular(self) -> None:
        """eta(-1/z) = sqrt(z/i) eta(z) at a point far from the fundamental domain."""
        z = mp.mpc(0.31, 0.02)
        assert abs(eval_eta(-1 / z) - mp.sqrt(z / mp.j) * eval_eta(z)) < TOL

    def test_eisenstein_weights(self) -> None:
        """E4 and E6 transform with weights 4 and 6; E4(rho) = 0 and E6(i) = 0."""
        z = mp.mpc(0.2, 0.3)
        assert abs(eval_e4(-1 / z) - z ** 4 * eval_e4(z)) < mp.mpf(10) ** -15
        assert abs(eval_e6(-1 / z) - z ** 6 * eval_e6(z)) < mp.mpf(10) ** -15
        assert abs(eval_e4(mp.mpc(-0.5, mp.sqrt(3) / 2))) < TOL
        assert abs(eval_e6(mp.mpc(0, 1))) < TOL

    def test_delta_identity(self) -> None:
        """1728 Delta = E4^3 - E6^2."""
        z = mp.mpc(0.1, 1.1)
        left = 1728 * eval_delta(z)
        right = eval_e4(z) ** 3 - eval_e6(z) ** 2
        assert abs(left - right) < mp.mpf(10) ** -15 * abs(right)

    def test_theta_against_jtheta(self) -> None:
        """theta(z) = theta_3(0, e^{i pi 2z}) on both evaluation paths."""
        for z in (mp.mpc(0.1, 0.5), mp.mpc(0.37, 0.03), mp.mpc(-0.45, 0.11)):
            expected = mp.jtheta(3, 0, mp.expj(2 * mp.pi * z))
            assert abs(eval_theta(z) - expected) < mp.mpf(10) ** -15 * max(1, abs(expected))

    def test_w_j1_matches_expansion(self) -> None:
        """The closed form of g1 agrees with its q-series."""
        z = mp.mpc(0.2, 0.4)
        series = get_form("g1").evaluate_series(z).value
        assert abs(eval_w_j1(z) - series) < mp.mpf(10) ** -15 * abs(series)


class TestCoefficients:
    """Exact integer q-expansions."""

    def test_j1_coefficients(self) -> None:
        """q^-1 + 196884 q + 21493760 q^2 + 864299970 q^3."""
        assert j1_coefficients(3) == [1, 0, 196884, 21493760, 864299970]

    def test_delta_coefficients(self) -> None:
        """Ramanujan tau."""
        assert delta_coefficients(6) == [0, 1, -24, 252, -1472, 4830, -6048]

    def test_g1_coefficients(self) -> None:
        """-q^-1 + 2 - 248 q^3 + 492 q^4 - 4119 q^7 + 7256 q^8."""
        coefficients = g1_coefficients(8)
        assert coefficients == [-1, 2, 0, 0, -248, 492, 0, 0, -4119, 7256]

    def test_g1_vanishes_off_residues(self) -> None:
        """Only exponents n = 0, 3 mod 4 occur."""
        coefficients = g1_coefficients(60)
        for n in range(1, 61):
            if n % 4 in (1, 2):
                assert coefficients[n + 1] == 0

    def test_negative_nmax_rejected(self) -> None:
        """nmax must be non-negative."""
        with pytest.raises(InvalidArgumentError):
            j1_coefficients(-1)


class TestGrowth:
    """Tail bounds and cutoffs."""

    def test_tail_bound_geometric(self) -> None:
        """Constant coefficients: the tail is a geometric series."""
        growth = Growth(mp.mpf(1), mp.mpf(0))
        y = mp.mpf(0.5)
        ratio = mp.exp(-2 * mp.pi * y)
        expected = ratio ** 10 / (1 - ratio)
        assert abs(tail_bound(growth, y, 10) - expected) < mp.mpf(10) ** -20

    def test_zero_growth(self) -> None:
        """A zero constant means no tail."""
        assert tail_bound(Growth(mp.mpf(0), mp.mpf(5)), mp.mpf(0.1), 1) == 0

    def test_required_cutoff(self) -> None:
        """The cutoff is the first D whose tail falls below the tolerance."""
        growth = Growth(mp.mpf(1), mp.mpf(0))
        y, tol = mp.mpf(1), mp.mpf(10) ** -20
        cutoff = required_cutoff(growth, y, tol)
        assert tail_bound(growth, y, cutoff + 1) <= tol
        assert tail_bound(growth, y, cutoff) > tol
        with pytest.raises(DomainError):
            required_cutoff(growth, mp.mpf(0), tol)


class TestRegistry:
    """Registered forms and synthetic forms."""

    def test_available(self) -> None:
        """The registry lists every label."""
        for label in ("j1", "j2", "zero", "theta", "theta3", "theta4", "g1", "delta"):
            assert label in available_forms()

    def test_unknown_label(self) -> None:
        """Unknown labels raise InvalidArgumentError."""
        with pytest.raises(InvalidArgumentError):
            get_form("j3")

    def test_j1_form(self) -> None:
        """Series and closed evaluation of j1 agree."""
        j1 = get_form("j1")
        z = mp.mpc(0.1, 0.9)
        assert abs(j1.evaluate_series(z).value - eval_j1(z)) < mp.mpf(10) ** -15
        assert j1.a(-1) == 1 and j1.constant_term() == 0

    def test_j2_is_faber(self) -> None:
        """j2 = j1^2 - 393768 has principal part q^-2 and no constant term."""
        j2 = get_form("j2")
        assert j2.a(-2) == 1 and j2.a(-1) == 0 and j2.a(0) == 0
        z = mp.mpc(0, 1.2)
        assert abs(j2.evaluate_series(z).value - j2.evaluate(z)) < mp.mpf(10) ** -12

    def test_theta_powers(self) -> None:
        """r_3 and r_4 representation numbers."""
        theta3 = get_form("theta3")
        theta4 = get_form("theta4")
        assert [int(theta3.a(n).real) for n in range(6)] == [1, 6, 12, 8, 6, 24]
        assert [int(theta4.a(n).real) for n in range(4)] == [1, 8, 24, 32]

    def test_zero_form(self) -> None:
        """The zero form has no coefficients."""
        assert get_form("zero").is_zero()

    def test_bounded_coefficients(self) -> None:
        """A form with n_max refuses coefficients beyond it."""
        f = FormSpec("short", mp.mpf(0.5), 4, 0, lambda n: 1, n_max=5)
        assert f.a(5) == 1
        with pytest.raises(InsufficientDataError) as e:
            f.a(6)
        assert e.value.required == 6

    def test_form_from_coefficients(self) -> None:
        """Finite q-polynomials evaluate exactly."""
        f = form_from_coefficients("poly", 2.5, {1: 1, 3: -2})
        z = mp.mpc(0.1, 0.3)
        q = mp.expj(2 * mp.pi * z)
        assert abs(f.evaluate(z) - (q - 2 * q ** 3)) < TOL
        assert f.n_min == 1


class TestG1FromTraces:
    """g1 assembled from a table of traces."""

    def test_eval_g1_matches_closed_form(self, j1_shadow_table) -> None:
        """With traces down to d = -60 the series matches the closed form at Im z = 0.5."""
        z = mp.mpc(0.1, 0.5)
        value = eval_g1(z, j1_shadow_table)
        assert abs(value.value - eval_w_j1(z)) < mp.mpf(10) ** -12

    def test_eval_g1_reads_constant_and_polar_terms_from_table(self, j1_shadow_table) -> None:
        """The q^0 and q^-1 coefficients are Tr_0 / 2 and -Tr^c_1 / 2 of the table at hand."""
        z = mp.mpc(0.1, 0.5)
        base = eval_g1(z, j1_shadow_table).value
        j1_shadow_table.zero = TraceValue(j1_shadow_table.zero.value + 2, mp.mpf(0))
        shifted = eval_g1(z, j1_shadow_table).value
        assert abs(shifted - base - 1) < mp.mpf(10) ** -20
        j1_shadow_table.comp[1] = mp.mpc(4)
        q = mp.expj(2 * mp.pi * z)
        polar = eval_g1(z, j1_shadow_table).value
        assert abs(polar - shifted + 1 / q) < mp.mpf(10) ** -20

    def test_eval_g1_reports_requirement(self, j1_shadow_table) -> None:
        """Low points need more traces than the table holds."""
        with pytest.raises(InsufficientDataError) as e:
            eval_g1(mp.mpc(0, 0.01), j1_shadow_table)
        assert e.value.required > 60
