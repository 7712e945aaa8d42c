from fractions import Fraction

import pytest

from motivic_forge.series import (
    AtLeast, Exact, PrimeField, SeriesMatrix, TruncatedSeries, determinant, field, format_series, min_valuation,
)


def S(cs, N=8, p=None):
    return TruncatedSeries(cs, N, field(p))


def test_valuations():
    assert S([0, 0, 3]).valuation() == Exact(2)
    assert S([0] * 8).valuation() == AtLeast(8)
    assert str(Exact(3)) == "Exact(3)" and str(AtLeast(4)) == "AtLeast(4)"
    assert min_valuation([AtLeast(8), Exact(5)], AtLeast(8)) == Exact(5)
    assert min_valuation([AtLeast(3), Exact(5)], AtLeast(8)) == AtLeast(3)


def test_prime_field_reduction():
    F = PrimeField(5)
    assert F.reduce(7) == 2
    assert F.reduce(Fraction(1, 2)) == 3
    assert F.inv(2) == 3
    with pytest.raises(ValueError):
        PrimeField(4)


def test_arithmetic_and_inverse():
    a = S([1, 1])
    inv = a.inverse()
    assert a * inv == S([1])
    assert inv.coeffs[:4] == (1, -1, 1, -1)
    b = S([1, 2, 0, 1], p=5)
    assert b * b.inverse() == S([1], p=5)
    with pytest.raises(ZeroDivisionError):
        S([0, 1]).inverse()


def test_shift_and_scale():
    assert S([0, 0, 1, 2]).shift_down(2) == S([1, 2], 6)
    assert S([1, 1, 1]).substitute_scale(2) == S([1, 2, 4])


def test_mixed_precision_truncates():
    assert (S([1, 1], 4) + S([0, 1], 8)).precision == 4


def test_determinant_and_product():
    A = SeriesMatrix.from_values([[[0, 1], 1], [0, [0, 1]]], 8)
    assert determinant(A.entries) == S([0, 0, 1])
    assert (SeriesMatrix.identity(2, 8) @ A) == A
    assert A.transpose().entries[0][1] == S([0])


def test_format_series():
    assert format_series(S([0, 1, 0, 2])) == "t + 2*t^3"
    assert format_series(S([0])) == "0"
