"""
QVBS v1 - Sparse polynomial and lowering-identity tests

Run with:
    pytest tests/unit/test_oracle_polynomial.py
"""

import pytest

from qvbs.errors import InvalidParameterError, InvalidSpinError
from qvbs.oracle import Polynomial, coproduct_lowering, highest_weight_vector, lowered_closed_form, verify_proposition1
from qvbs.oracle.polynomial import cartan_half, dilate, lowering, q_difference, transfer_degree
from qvbs.qcore import q_integer


@pytest.mark.unit
class TestPolynomial:
    """Sparse arithmetic"""

    def test_zero_coefficients_dropped(self):
        """Test that zero terms never appear."""
        poly = Polynomial(2, {(1, 0): 0.0, (0, 1): 2.0})
        assert len(poly) == 1
        assert (poly - poly).terms == {}

    def test_bad_exponents(self):
        """Test that keys must match nvars and be nonnegative."""
        with pytest.raises(InvalidParameterError):
            Polynomial(2, {(1,): 1.0})
        with pytest.raises(InvalidParameterError):
            Polynomial(2, {(1, -1): 1.0})

    def test_square_of_sum(self):
        """Test (x + y)^2 = x^2 + 2xy + y^2."""
        x_plus_y = Polynomial(2, {(1, 0): 1.0, (0, 1): 1.0})
        square = x_plus_y ** 2
        assert square.terms == {(2, 0): 1.0, (1, 1): 2.0, (0, 2): 1.0}

    def test_binomial_term(self):
        """Test c1 x_0 y_1 + c2 y_0 x_1."""
        term = Polynomial.binomial_term(4, {0: 1, 3: 1}, 2.0, {1: 1, 2: 1}, -0.5)
        assert term.terms == {(1, 0, 0, 1): 2.0, (0, 1, 1, 0): -0.5}

    def test_scalar_multiplication(self):
        """Test both scalar product orders."""
        poly = Polynomial.monomial((1, 2), 3.0)
        assert (2 * poly).coefficient((1, 2)) == 6.0
        assert (poly * 2).coefficient((1, 2)) == 6.0

    def test_mismatched_variables(self):
        """Test that polynomials in different variable counts do not mix."""
        with pytest.raises(InvalidParameterError):
            Polynomial.constant(2) + Polynomial.constant(3)

    def test_iteration_is_sorted(self):
        """Test deterministic iteration order."""
        poly = Polynomial(2, {(0, 2): 1.0, (2, 0): 1.0, (1, 1): 1.0})
        assert [key for key, _ in poly] == [(0, 2), (1, 1), (2, 0)]


@pytest.mark.unit
class TestQBosonOperators:
    """Dilations and the lowering operator"""

    def test_dilate(self):
        """Test D_p x^3 = p^3 x^3."""
        poly = dilate(Polynomial.monomial((3, 1)), 0, 2.0)
        assert poly.coefficient((3, 1)) == 8.0

    def test_q_difference(self):
        """Test the q-difference of x^n is [n] x^n."""
        poly = q_difference(Polynomial.monomial((3, 0)), 0, 1.5)
        assert poly.coefficient((3, 0)) == pytest.approx(q_integer(3, 1.5))

    def test_transfer_degree_needs_divisor(self):
        """Test that dividing by an absent variable is refused."""
        with pytest.raises(InvalidParameterError):
            transfer_degree(Polynomial.monomial((0, 2)), 0, 1)

    def test_lowering_kills_constants_in_x(self):
        """Test X^- y^n = 0."""
        assert lowering(Polynomial.monomial((0, 4)), 0, 1, 1.3).terms == {}

    def test_lowering_single_site(self):
        """Test X^- x^2 = [2] x y."""
        poly = lowering(Polynomial.monomial((2, 0)), 0, 1, 1.3)
        assert len(poly) == 1
        assert poly.coefficient((1, 1)) == pytest.approx(q_integer(2, 1.3))

    def test_cartan_half(self):
        """Test q^{H/2} x^a y^b = q^{(a-b)/2} x^a y^b."""
        poly = cartan_half(Polynomial.monomial((3, 1)), 0, 1, 4.0)
        assert poly.coefficient((3, 1)) == pytest.approx(4.0)

    @pytest.mark.parametrize("q", [0.5, 1.0, 1.7])
    def test_coproduct_monomial_rule(self, q):
        """Test Delta X^- on x_a^a y_a^b x_b^c y_b^d."""
        a, b, c, d = 2, 1, 1, 3
        result = coproduct_lowering(Polynomial.monomial((a, b, c, d)), q)
        assert result.coefficient((a - 1, b + 1, c, d)) == pytest.approx(q_integer(a, q) * q ** ((c - d) / 2))
        assert result.coefficient((a, b, c - 1, d + 1)) == pytest.approx(q ** ((b - a) / 2) * q_integer(c, q))
        assert len(result) == 2

    def test_coproduct_needs_two_sites(self):
        """Test that the coproduct acts on four variables."""
        with pytest.raises(InvalidParameterError):
            coproduct_lowering(Polynomial.constant(2), 1.0)


@pytest.mark.unit
class TestLoweringIdentity:
    """(Delta X^-)^n v_J against its closed form"""

    def test_spin1_first_lowering(self):
        """Test one lowering of v_1 at S=1 term by term."""
        q = 1.4
        lowered = coproduct_lowering(highest_weight_vector(1, 1, q), q)
        assert lowered.coefficient((1, 1, 1, 1)) == pytest.approx(q - q ** -3)
        assert lowered.coefficient((2, 0, 0, 2)) == pytest.approx(1 / q)
        assert lowered.coefficient((0, 2, 2, 0)) == pytest.approx(-1 / q)

    @pytest.mark.parametrize("S", [1, 2, 3])
    def test_n_zero_is_highest_weight(self, S):
        """Test that the closed form at n = 0 is v_J itself."""
        for J in range(2 * S + 1):
            difference = lowered_closed_form(S, J, 0, 0.8) - highest_weight_vector(S, J, 0.8)
            assert difference.max_abs() == 0.0

    @pytest.mark.parametrize("S", [1, 2])
    def test_all_J_and_n(self, S, q_oracle):
        """Test every J in 0..2S and n in 0..2J+1."""
        for J in range(2 * S + 1):
            for n in range(2 * J + 2):
                report = verify_proposition1(S, J, n, q_oracle)
                assert report.passed, report.error_messages

    @pytest.mark.slow
    def test_spin3(self, q_oracle):
        """Test the lowering identity at S=3."""
        for J in range(7):
            for n in range(2 * J + 2):
                report = verify_proposition1(3, J, n, q_oracle)
                assert report.passed, report.error_messages

    def test_vanishes_past_the_bottom(self):
        """Test that n = 2J + 1 lowerings give zero."""
        report = verify_proposition1(2, 2, 5, 1.3)
        assert report.vanishing_expected
        assert report.terms_rhs == 0
        assert report.passed

    def test_ranges(self):
        """Test the limits on S, J and n."""
        with pytest.raises(InvalidSpinError):
            verify_proposition1(4, 0, 0, 1.0)
        with pytest.raises(InvalidSpinError):
            verify_proposition1(1, 3, 0, 1.0)
        with pytest.raises(InvalidSpinError):
            verify_proposition1(1, 1, 4, 1.0)
