from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lambda_lab import (
    Dyadic,
    Exp2Rational,
    GeometricWeights,
    OnesWeights,
    ParseError,
    SuperExpWeights,
    TableWeights,
    parse_weights,
)

from oracles import frac, geometric_tail, superexp_tail

D = Dyadic

mags = st.builds(
    Exp2Rational,
    st.fractions(min_value=Fraction(1, 10**6), max_value=Fraction(10**6)),
    st.integers(min_value=-(10**9), max_value=10**9),
)


class TestExp2Rational:
    @given(mags, mags)
    def test_order_matches_exact_value(self, a, b):
        # only feasible to cross-check when exponents are materialisable
        if abs(a.exp2) < 2000 and abs(b.exp2) < 2000:
            assert (a < b) == (a.as_fraction_unchecked() < b.as_fraction_unchecked())

    @given(mags, mags)
    def test_order_is_antisymmetric(self, a, b):
        assert (a < b) == (b > a)
        assert (a <= b) == (b >= a)
        assert (a < b) or (b < a) or (a == b)

    def test_huge_gap_comparisons_are_cheap(self):
        tiny = Exp2Rational(Fraction(16, 15), -(10**13))
        small = Exp2Rational(Fraction(1), -100)
        assert tiny < small
        assert not small < tiny

    def test_equal_values_in_different_forms(self):
        assert Exp2Rational(Fraction(3, 2), 1) == Exp2Rational(Fraction(3), 0)

    @given(mags, mags)
    def test_mul_exact(self, a, b):
        c = a * b
        if max(abs(a.exp2), abs(b.exp2), abs(c.exp2)) < 2000:
            assert c.as_fraction_unchecked() == (
                a.as_fraction_unchecked() * b.as_fraction_unchecked()
            )

    def test_add_with_budget(self):
        a = Exp2Rational(Fraction(1), -3)
        b = Exp2Rational(Fraction(1), -5)
        assert a.add(b).as_fraction_unchecked() == Fraction(5, 32)

    def test_reciprocal(self):
        a = Exp2Rational(Fraction(3, 4), -7)
        r = a.reciprocal()
        assert r.as_fraction_unchecked() == 1 / a.as_fraction_unchecked()


class TestSuperExp:
    def test_weights(self):
        se = SuperExpWeights()
        assert frac(se.weight(1)) == Fraction(1, 2)
        assert frac(se.weight(3)) == Fraction(1, 512)

    @pytest.mark.parametrize("n", [0, 1, 2, 5, 10, 25])
    def test_tail_bound_is_true_upper_bound(self, n):
        se = SuperExpWeights()
        partial, _ = superexp_tail(n)
        bound = se.tail_bound(n).as_fraction()
        assert partial < bound

    @pytest.mark.parametrize("n", [1, 2, 6])
    def test_tail_bound_is_reasonably_tight(self, n):
        se = SuperExpWeights()
        partial, rem = superexp_tail(n)
        bound = se.tail_bound(n).as_fraction()
        assert bound <= Fraction(23, 20) * Fraction(1, 1 << ((n + 1) * (n + 1)))
        assert bound < 2 * (partial + rem)

    def test_tail_over_weight_matches_definition(self):
        se = SuperExpWeights()
        for n in (1, 2, 7):
            tow = se.tail_over_weight(n).as_fraction()
            tb = se.tail_bound(n).as_fraction()
            assert tow == tb / frac(se.weight(n))

    def test_block_sum_exact(self):
        se = SuperExpWeights()
        got = se.block_sum(2, 5).as_fraction()
        assert got == sum(Fraction(1, 1 << (j * j)) for j in range(2, 6))

    def test_block_sum_refuses_huge_span(self):
        se = SuperExpWeights()
        assert se.block_sum(10, 10**7) is None

    def test_weight_at_huge_rank_stays_cheap(self):
        se = SuperExpWeights()
        w = se.weight(4_000_000)
        assert w.mantissa == 1 and w.exponent == 4_000_000**2


class TestGeometric:
    def test_weights_and_tail(self):
        g = GeometricWeights(D(1, 1))
        assert frac(g.weight(3)) == Fraction(1, 8)
        assert g.tail_bound(2).as_fraction() == geometric_tail(Fraction(1, 2), 2)

    def test_non_power_ratio(self):
        g = GeometricWeights(D(3, 2))
        assert frac(g.weight(2)) == Fraction(9, 16)
        assert g.tail_bound(1).as_fraction() == geometric_tail(Fraction(3, 4), 1)

    def test_block_sum_exact(self):
        g = GeometricWeights(D(3, 2))
        got = g.block_sum(2, 6).as_fraction()
        assert got == sum(Fraction(3, 4) ** j for j in range(2, 7))

    def test_tail_over_weight_constant(self):
        g = GeometricWeights(D(1, 2))
        assert g.tail_over_weight(5).as_fraction() == Fraction(1, 3)
        assert g.tail_over_weight(500).as_fraction() == Fraction(1, 3)


class TestOnesAndTable:
    def test_ones(self):
        w = OnesWeights()
        assert w.weight(17) == D(1)
        assert w.tail_bound(3) is None
        assert w.block_sum(4, 9).as_fraction() == 6

    def test_table(self):
        t = TableWeights([D(1, 1), D(1, 2), D(1, 4)])
        assert t.weight(2) == D(1, 2)
        assert t.tail_bound(1).as_fraction() == Fraction(1, 4) + Fraction(1, 16)
        with pytest.raises(IndexError):
            t.weight(4)

    def test_table_tail_is_exact_suffix(self):
        t = TableWeights([D(1), D(1, 3), D(5, 4)])
        assert t.tail_bound(0).as_fraction() == 1 + Fraction(1, 8) + Fraction(5, 16)


class TestParsing:
    @pytest.mark.parametrize(
        "text,cls",
        [
            ("ones", OnesWeights),
            ("superexp", SuperExpWeights),
            ("geometric:1/2^1", GeometricWeights),
            ("geometric:1/4", GeometricWeights),
            ("table:1/2,1/4", TableWeights),
        ],
    )
    def test_accepted(self, text, cls):
        assert isinstance(parse_weights(text), cls)

    def test_rejected(self):
        with pytest.raises(ParseError):
            parse_weights("harmonic")
        with pytest.raises(ParseError):
            parse_weights("geometric:1/3")
