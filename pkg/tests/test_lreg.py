"""
Tests for regularized twisted L-functions and Eichler integrals.
"""

from fractions import Fraction

import pytest
from mpmath import mp

from src.singular_traces.arith import I_UNIT, ONE, Matrix2Z, UnitComplex
from src.singular_traces.exceptions import (
    DomainError,
    InvalidArgumentError,
    PoleError,
    UnsupportedInputError,
)
from src.singular_traces.lreg import (
    CuspExpansion,
    LregQuery,
    cusp_multiplier,
    dual_matrix,
    eichler_cusp_series,
    eichler_reg_series,
    fminus_from_shadow,
    lreg_cutoffs,
    lreg_eval,
    lreg_funeq_residual,
    lreg_integral_check,
    normalized,
    period_function,
    two_cusp_integral,
)
from src.singular_traces.modeval import eval_theta, form_from_coefficients, get_form
from src.singular_traces.specfun import power


def relative_gap(x: object, y: object) -> object:
    return abs(x - y) / max(1, abs(y))


@pytest.fixture
def synthetic():
    """b(0) = 1, b(1) = 1, b(2) = 1/2 in weight 3/2."""
    return form_from_coefficients("synthetic", 1.5, {0: 1, 1: 1, 2: 0.5})


class TestMatrices:
    """Normalization, multipliers and the dual cusp."""

    def test_normalized(self) -> None:
        """-gamma is replaced by gamma when c < 0."""
        gamma = Matrix2Z(1, 0, 4, 1)
        assert normalized(-gamma) == gamma
        assert normalized(gamma) == gamma

    def test_cusp_multiplier(self) -> None:
        """chi^{2k}: trivial for level one, chi for theta, chi^3 for theta^3."""
        gamma = Matrix2Z(3, 1, 8, 3)
        assert cusp_multiplier(mp.mpf(0), 1, Matrix2Z.S()) == ONE
        assert cusp_multiplier(mp.mpf(0.5), 4, gamma) == I_UNIT
        assert cusp_multiplier(mp.mpf(1.5), 4, gamma) == UnitComplex(6)
        with pytest.raises(UnsupportedInputError):
            cusp_multiplier(mp.mpf(0.5), 4, Matrix2Z.S())

    def test_dual_matrix(self) -> None:
        """-gamma^{-1} maps i*infinity to -d/c."""
        dual = dual_matrix(Matrix2Z(5, 1, 4, 1))
        assert dual == Matrix2Z(-1, 1, 4, -5)
        assert dual.cusp() == (-1, 4)


class TestCuspExpansion:
    """Expansions obtained from the multiplier system."""

    def test_value_matches_slash(self) -> None:
        """(cz+d)^{-1/2} theta(gamma z) is resynthesized from chi(gamma) b(n)."""
        theta = get_form("theta")
        gamma = Matrix2Z(3, 1, 8, 3)
        expansion = CuspExpansion.from_multiplier(theta, gamma)
        z = mp.mpc(0.1, 0.6)
        expected = power(gamma.j(z), -0.5) * eval_theta(gamma.act(z))
        assert abs(expansion.value(z) - expected) < mp.mpf(10) ** -20

    def test_dict_round_trip(self) -> None:
        """from_dict(to_dict()) keeps the coefficients and the cusp data."""
        theta = get_form("theta")
        expansion = CuspExpansion.at_infinity(theta)
        restored = CuspExpansion.from_dict(expansion.to_dict())
        assert restored.gamma == Matrix2Z.identity()
        assert restored.n_max == 32
        z = mp.mpc(0.1, 0.5)
        assert abs(restored.value(z) - eval_theta(z)) < mp.mpf(10) ** -20

    def test_malformed_dict(self) -> None:
        """Missing fields raise InvalidArgumentError."""
        with pytest.raises(InvalidArgumentError):
            CuspExpansion.from_dict({"gamma": [1, 0, 0, 1]})

    def test_constant_term_flag(self) -> None:
        """Theta has a constant term at 1/4, delta has none at any cusp."""
        assert CuspExpansion.from_multiplier(get_form("theta"), Matrix2Z(1, 0, 4, 1)).has_constant_term
        assert not CuspExpansion.at_infinity(get_form("delta")).has_constant_term


class TestLregQuery:
    """Argument checks and pole policy."""

    def test_positive_t(self) -> None:
        """t must be positive."""
        with pytest.raises(InvalidArgumentError):
            LregQuery.at_rational(get_form("theta"), 1, 4, 0.25, t=0)

    def test_gamma_must_match_cusp(self) -> None:
        """The supplied matrix has to map i*infinity to a/c."""
        with pytest.raises(InvalidArgumentError):
            LregQuery.at_rational(get_form("theta"), 3, 4, 0.25, gamma=Matrix2Z(1, 0, 4, 1))

    def test_pole_at_zero(self) -> None:
        """s = 0 is a pole when b(0) != 0."""
        query = LregQuery.at_rational(get_form("g1"), 1, 4, 0)
        with pytest.raises(PoleError):
            lreg_eval(query)

    def test_pole_at_weight(self) -> None:
        """s = k is a pole when the cusp carries a constant term."""
        query = LregQuery.at_rational(get_form("theta"), 1, 4, 0.5)
        with pytest.raises(PoleError):
            lreg_eval(query)

    def test_cutoffs(self) -> None:
        """The dual sum needs more terms than the sum at i*infinity."""
        query = LregQuery.at_rational(get_form("theta"), 1, 4, 0.25)
        n_inf, n_cusp = lreg_cutoffs(query)
        assert 0 < n_inf < n_cusp


class TestLregValues:
    """Independence of the auxiliary choices and the functional equation."""

    @pytest.mark.parametrize("label", ["theta", "theta3"])
    def test_functional_equation(self, label: str) -> None:
        """The completed L-functions at 1/4 and -1/4 are related by gamma = (1 0; 4 1)."""
        residual = lreg_funeq_residual(get_form(label), Matrix2Z(1, 0, 4, 1), 0.25)
        assert abs(residual) < mp.mpf(10) ** -10

    def test_functional_equation_complex_s(self) -> None:
        """Off the real line, and at a cusp with nontrivial multiplier."""
        residual = lreg_funeq_residual(get_form("theta"), Matrix2Z(3, 1, 8, 3), mp.mpc(0.1, 0.7))
        assert abs(residual) < mp.mpf(10) ** -10

    def test_functional_equation_poles(self) -> None:
        """s = 0 and s = k are refused."""
        with pytest.raises(PoleError):
            lreg_funeq_residual(get_form("theta"), Matrix2Z(1, 0, 4, 1), 0)
        with pytest.raises(InvalidArgumentError):
            lreg_funeq_residual(get_form("theta"), Matrix2Z.identity(), 0.25)

    def test_t_independence(self) -> None:
        """L^reg_{1/4}(g1, 1/2) is the same for t = 1 and t = 1/2."""
        g1 = get_form("g1")
        one = lreg_eval(LregQuery.at_rational(g1, 1, 4, 0.5, t=1))
        half = lreg_eval(LregQuery.at_rational(g1, 1, 4, 0.5, t=0.5))
        assert relative_gap(half, one) < mp.mpf(10) ** -12

    def test_conjugate_cusps(self) -> None:
        """g1 has real coefficients, so L^reg at 3/4 is the conjugate of L^reg at 1/4."""
        g1 = get_form("g1")
        quarter = lreg_eval(LregQuery.at_rational(g1, 1, 4, 0.5, t=0.25))
        three_quarters = lreg_eval(LregQuery.at_rational(g1, 3, 4, 0.5, t=0.25))
        assert relative_gap(three_quarters, mp.conj(quarter)) < mp.mpf(10) ** -12
        assert abs(quarter.imag) > 1

    def test_t_independence_balanced_height(self) -> None:
        """t = 1/c agrees with t = 1 at the cusp 3/4."""
        g1 = get_form("g1")
        one = lreg_eval(LregQuery.at_rational(g1, 3, 4, 0.5, t=1))
        balanced = lreg_eval(LregQuery.at_rational(g1, 3, 4, 0.5, t=0.25))
        assert relative_gap(balanced, one) < mp.mpf(10) ** -12

    def test_gamma_independence(self) -> None:
        """gamma and gamma T give the same value."""
        g1 = get_form("g1")
        plain = lreg_eval(LregQuery.at_rational(g1, 1, 4, 0.5))
        shifted = lreg_eval(LregQuery.at_rational(g1, 1, 4, 0.5, gamma=Matrix2Z(1, 1, 4, 5)))
        assert relative_gap(shifted, plain) < mp.mpf(10) ** -12

    @pytest.mark.slow
    def test_t_independence_large_t(self) -> None:
        """t = 2 pushes the dual cutoff into the thousands and still agrees."""
        g1 = get_form("g1")
        one = lreg_eval(LregQuery.at_rational(g1, 1, 4, 0.5, t=1))
        two = lreg_eval(LregQuery.at_rational(g1, 1, 4, 0.5, t=2))
        assert relative_gap(two, one) < mp.mpf(10) ** -10

    @pytest.mark.slow
    def test_cusp_form_integral(self) -> None:
        """For Delta the regularized value is the convergent Mellin integral."""
        quadrature, series = lreg_integral_check(get_form("delta"), Matrix2Z(1, 0, 2, 1), 3)
        assert relative_gap(series, quadrature) < mp.mpf(10) ** -10

    def test_integral_check_needs_cusp_form(self) -> None:
        """Forms with constant terms have no convergent integral."""
        with pytest.raises(UnsupportedInputError):
            lreg_integral_check(get_form("theta"), Matrix2Z(1, 0, 4, 1), 0.25)


class TestEichlerIntegrals:
    """Regularized Eichler integrals and f^-."""

    @pytest.mark.parametrize("s", [mp.mpf(0.5), mp.mpc(0.3, 0.2), mp.mpf(-0.5)])
    def test_series_matches_quadrature(self, s: object) -> None:
        """The A-kernel series equals the vertical path integral for a cusp form."""
        g = form_from_coefficients("cusp", 1.5, {1: 1, 2: -0.5, 3: 0.25})
        z1, z2 = mp.mpc(0.1, 0.3), mp.mpc(0.2, 0.4)
        integral = mp.quad(
            lambda y: g.evaluate(mp.mpc(z1.real, y))
            * power(mp.mpc(z1.real, y) - mp.conj(z2), s) * mp.j,
            [z1.imag, z1.imag + 1, mp.inf],
        )
        series = eichler_reg_series(g, z1, z2, s)
        assert abs(series.value - integral) < mp.mpf(10) ** -15
        assert series.error < mp.mpf(10) ** -15

    def test_constant_term_regularization(self) -> None:
        """For b(0) alone the series is -(z1 - conj z2)^{s+1}/(s+1), the convergent integral."""
        g = form_from_coefficients("one", 1.5, {0: 1})
        z1, z2 = mp.mpc(0.1, 0.3), mp.mpc(-0.3, 0.5)
        s = mp.mpf(-2.5)
        integral = mp.quad(
            lambda y: power(mp.mpc(z1.real, y) - mp.conj(z2), s) * mp.j,
            [z1.imag, z1.imag + 1, mp.inf],
        )
        series = eichler_reg_series(g, z1, z2, s).value
        assert abs(series - integral) < mp.mpf(10) ** -15
        assert abs(series + power(z1 - mp.conj(z2), s + 1) / (s + 1)) < mp.mpf(10) ** -20

    def test_cusp_series_matches_quadrature(self) -> None:
        """Moving the cusp 0 to infinity reproduces the path integral from i down to 0."""
        delta = get_form("delta")
        z1, z2 = mp.mpc(0, 1), mp.mpc(0.2, 1.1)
        integral = -mp.quad(
            lambda y: delta.evaluate(mp.mpc(0, y)) * (mp.mpc(0, y) - mp.conj(z2)) ** 10 * mp.j,
            [0, 0.25, 0.5, 1],
        )
        series = eichler_cusp_series(delta, Matrix2Z.S(), z1, z2)
        assert relative_gap(series, integral) < mp.mpf(10) ** -15

        at_infinity = eichler_cusp_series(delta, Matrix2Z.identity(), z1, z2)
        assert at_infinity == eichler_reg_series(delta, z1, z2, 10).value

    def test_domain_checks(self, synthetic) -> None:
        """z1 must lie in the upper half-plane; s = -1 is a pole."""
        with pytest.raises(DomainError):
            eichler_reg_series(synthetic, mp.mpc(0.1, -0.2), mp.mpc(0, 1), 0.5)
        with pytest.raises(PoleError):
            eichler_reg_series(synthetic, mp.mpc(0, 1), mp.mpc(0, 1), -1)

    def test_fminus_has_shadow_g(self, synthetic) -> None:
        """xi_{2-k} f^- = 2i y^{2-k} conj(d f^-/d conj z) gives back g."""
        z = mp.mpc(0.15, 0.7)
        fx = mp.diff(lambda x: fminus_from_shadow(synthetic, mp.mpc(x, z.imag)), z.real)
        fy = mp.diff(lambda y: fminus_from_shadow(synthetic, mp.mpc(z.real, y)), z.imag)
        dbar = (fx + mp.j * fy) / 2
        xi = 2 * mp.j * z.imag ** (2 - synthetic.weight) * mp.conj(dbar)
        assert abs(xi - synthetic.evaluate(z)) < mp.mpf(10) ** -10

    def test_two_cusp_integral_trivial(self, synthetic) -> None:
        """The integral from a cusp to itself vanishes."""
        assert two_cusp_integral(synthetic, None, None, mp.mpc(0.1, 0.5)) == 0

    def test_period_function_at_translation(self) -> None:
        """gamma with c = 0 has no period."""
        assert period_function(get_form("theta3"), Matrix2Z.T(1), mp.mpc(0.1, 0.5)) == 0

    @pytest.mark.slow
    def test_base_point_drops_out(self) -> None:
        """int_{1/4}^{i oo} theta^3 (tau - conj z)^{-1/2} dtau does not depend on z1."""
        theta3 = get_form("theta3")
        z = mp.mpc(0.2, 0.5)
        first = two_cusp_integral(theta3, Fraction(1, 4), None, z, mp.mpc(0, 1))
        second = two_cusp_integral(theta3, Fraction(1, 4), None, z, mp.mpc(0.3, 0.7))
        assert relative_gap(second, first) < mp.mpf(10) ** -12

    @pytest.mark.slow
    def test_period_function_base_point(self) -> None:
        """The period of f^- at (1 0; 4 1) does not depend on the base point."""
        theta3 = get_form("theta3")
        gamma = Matrix2Z(1, 0, 4, 1)
        z = mp.mpc(0.2, 0.5)
        first = period_function(theta3, gamma, z)
        second = period_function(theta3, gamma, z, mp.mpc(0.3, 0.7))
        assert relative_gap(second, first) < mp.mpf(10) ** -12
