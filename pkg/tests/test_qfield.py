import math
from fractions import Fraction

import mpmath
import pytest

from paramodular_verify.exceptions import RadicandMismatchError
from paramodular_verify.qfield import QuadExt, QuadOp, embed_real, format_quad, parse_quad, quad_arith


# ---------------------------------------------------------
# Helpers
# ---------------------------------------------------------
def sample_elements(d=7):
    return [
        QuadExt(1, 1, d),
        QuadExt(Fraction(1, 2), Fraction(-3, 4), d),
        QuadExt(-2, Fraction(5, 3), d),
        QuadExt(3),
    ]


# ---------------------------------------------------------
# Field arithmetic
# ---------------------------------------------------------
def test_product_of_conjugates_is_the_norm():
    x = QuadExt(1, 1, 7)
    assert x * x.conjugate() == -6
    assert x.norm() == -6


def test_sqrt_squares_to_radicand():
    root = QuadExt.sqrt_of(7)
    assert root * root == 7
    assert (root * root).is_integral()


def test_inverse_and_division():
    for x in sample_elements():
        assert x * x.inverse() == 1
        assert x / x == 1
        assert 1 / x == x.inverse()


def test_distributivity():
    elements = sample_elements()
    for a in elements:
        for b in elements:
            for c in elements:
                assert a * (b + c) == a * b + a * c


def test_quad_arith_dispatch():
    x, y = QuadExt(1, 1, 5), QuadExt(2, -1, 5)
    assert quad_arith(x, y, QuadOp.ADD) == QuadExt(3, 0, 5)
    assert quad_arith(x, y, "sub") == QuadExt(-1, 2, 5)
    assert quad_arith(x, y, "mul") == x * y
    assert quad_arith(x, y, "div") * y == x


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        QuadExt(0).inverse()


def test_mixed_radicands_are_rejected():
    with pytest.raises(RadicandMismatchError):
        QuadExt.sqrt_of(7) + QuadExt.sqrt_of(5)
    # rationals combine with every field
    assert QuadExt.sqrt_of(7) + 1 == QuadExt(1, 1, 7)


def test_radicand_must_be_square_free():
    with pytest.raises(ValueError):
        QuadExt(0, 1, 4)


# ---------------------------------------------------------
# Canonical form
# ---------------------------------------------------------
def test_rationals_forget_their_field():
    x = QuadExt(2, 0, 7)
    assert x.radicand == 1
    assert x == QuadExt(2) == 2
    assert hash(x) == hash(QuadExt(2))


def test_radicand_one_folds_into_rational_part():
    assert QuadExt(1, 1, 1) == 2


def test_integrality():
    assert QuadExt(4).is_integral()
    assert not QuadExt(Fraction(1, 2)).is_integral()
    assert not QuadExt.sqrt_of(3).is_rational()


# ---------------------------------------------------------
# Embedding and text form
# ---------------------------------------------------------
def test_embed_real_double():
    assert embed_real(QuadExt.sqrt_of(2)) == pytest.approx(math.sqrt(2), rel=1e-15)
    assert embed_real(Fraction(1, 3)) == pytest.approx(1 / 3, rel=1e-15)
    assert float(QuadExt(1, 1, 5)) == pytest.approx((1 + math.sqrt(5)), rel=1e-15)


def test_embed_real_high_precision():
    value = embed_real(QuadExt.sqrt_of(2), precision_bits=120)
    assert isinstance(value, mpmath.mpf)
    with mpmath.workprec(200):
        assert abs(value - mpmath.sqrt(2)) < mpmath.mpf(2) ** -115


def test_embed_real_rejects_low_precision():
    with pytest.raises(ValueError):
        embed_real(QuadExt(1), precision_bits=24)


def test_text_form():
    x = QuadExt(Fraction(1, 2), Fraction(-3, 4), 7)
    assert format_quad(x) == "1/2+-3/4*sqrt(7)"
    assert parse_quad("1/2+-3/4*sqrt(7)") == x
    assert str(QuadExt(5)) == "5/1+0/1*sqrt(1)"


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        parse_quad("sqrt(7)")
