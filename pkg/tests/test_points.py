from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subshiftlab.points import (
    IrrationalityGuardError,
    SymbolicPoint,
    check_irrational,
    golden_conjugate,
    simplest_rational_between,
    to_fixed,
)
from oracles import golden_numerator, sturmian_bits


def test_constant_and_periodic():
    assert SymbolicPoint.constant(1).to_text(5) == "11111"
    assert SymbolicPoint.periodic("011").to_text(8) == "01101101"


def test_eventually_constant():
    x = SymbolicPoint.eventually_constant("101", fill=0)
    assert x.to_text(6) == "101000"
    assert x[10**9] == 0


def test_from_support_finite_and_predicate():
    assert SymbolicPoint.from_support([0, 3]).to_text(5) == "10010"
    evens = SymbolicPoint.from_support(lambda i: i % 2 == 0)
    assert evens.to_text(4) == "1010"


def test_from_text_tail():
    assert SymbolicPoint.from_text("12", alphabet_size=3, tail="0").to_text(4) == "1200"
    with pytest.raises(ValueError):
        SymbolicPoint.from_text("2")


def test_shift():
    x = SymbolicPoint.periodic("0111")
    assert x.shift(1).to_text(4) == "1110"
    assert x.shift(5).to_text(3) == x.shift(1).to_text(3)
    with pytest.raises(ValueError):
        x.shift(-1)


def test_with_prefix():
    x = SymbolicPoint.with_prefix([1, 1], SymbolicPoint.constant(0))
    assert x.to_text(4) == "1100"


def test_block_and_prefix_agree_for_random():
    x = SymbolicPoint.bernoulli(7)
    p = x.prefix(200_000)
    assert np.array_equal(x.block(65_530, 65_550), p[65_530:65_550])
    assert np.array_equal(SymbolicPoint.bernoulli(7).block(100_000, 100_050), p[100_000:100_050])


def test_bernoulli_is_balanced():
    mean = SymbolicPoint.bernoulli(1).prefix(1 << 18).mean()
    assert abs(mean - 0.5) < 0.01


def test_prefix_is_read_only():
    p = SymbolicPoint.periodic("01").prefix(10)
    with pytest.raises(ValueError):
        p[0] = 1


def test_getitem_negative():
    with pytest.raises(IndexError):
        SymbolicPoint.constant(0)[-1]


@settings(max_examples=40, deadline=None)
@given(st.text(alphabet="01", min_size=1, max_size=12), st.integers(0, 50), st.integers(1, 50))
def test_block_matches_rule(word, a, length):
    x = SymbolicPoint.periodic(word)
    assert x.block(a, a + length).tolist() == [x[i] for i in range(a, a + length)]


class TestRotation:
    def test_golden_matches_oracle(self):
        g = golden_conjugate(256)
        assert g == Fraction(golden_numerator(256), 1 << 256)

    def test_to_fixed(self):
        assert to_fixed(Fraction(1, 4), 8) == 64
        assert to_fixed(Fraction(5, 4), 8) == 64

    def test_coding_matches_mechanical_formula(self):
        alpha = golden_conjugate(96)
        beta = Fraction(1, 3)
        x = SymbolicPoint.rotation_coding(alpha, beta, bits=96)
        expect = sturmian_bits(to_fixed(alpha, 96), to_fixed(beta, 96), 96, 50_000)
        assert x.prefix(50_000).tobytes() == expect

    def test_coding_block_offset(self):
        x = SymbolicPoint.rotation_coding(golden_conjugate(96), Fraction(0))
        full = x.prefix(3000)
        assert np.array_equal(x.block(1234, 2999), full[1234:2999])

    def test_symbol_frequency_is_alpha(self):
        alpha = golden_conjugate(96)
        x = SymbolicPoint.rotation_coding(alpha, Fraction(0))
        assert abs(x.prefix(1 << 16).mean() - float(alpha)) < 1e-4


class TestGuard:
    def test_simplest_rational(self):
        assert simplest_rational_between(Fraction(3, 10), Fraction(4, 10)) == Fraction(1, 3)
        assert simplest_rational_between(Fraction(0), Fraction(1, 5)) == Fraction(1, 6)
        assert simplest_rational_between(Fraction(1, 2), Fraction(2, 3)) == Fraction(3, 5)

    @settings(max_examples=80, deadline=None)
    @given(st.fractions(min_value=0, max_value=3, max_denominator=200), st.fractions(min_value=Fraction(1, 200), max_value=1, max_denominator=200))
    def test_simplest_rational_is_minimal(self, lo, width):
        hi = lo + width
        r = simplest_rational_between(lo, hi)
        assert lo < r < hi
        for q in range(1, r.denominator):
            # no rational with a smaller denominator fits
            n = (lo * q).__floor__() + 1
            assert not Fraction(n, q) < hi

    def test_golden_accepted(self):
        check_irrational(golden_conjugate(256))

    @pytest.mark.parametrize("alpha", [Fraction(1, 2), Fraction(355, 1000), Fraction(1, 3) + Fraction(1, 1 << 80)])
    def test_rationals_rejected(self, alpha):
        with pytest.raises(IrrationalityGuardError):
            check_irrational(alpha)

    def test_out_of_range(self):
        with pytest.raises(IrrationalityGuardError):
            check_irrational(Fraction(3, 2))
