"""The positivity/clip/quantize/simplify pipeline and the modification
series criterion."""

from fractions import Fraction

import pytest

from lambda_lab import (
    Dyadic,
    DyadicInterval,
    OnesWeights,
    PiecewiseWitness,
    add_positive_floor,
    clip_at_one,
    count_in,
    dyadic_ladder,
    indicator,
    modification_series_check,
    partial_sum,
    quantize_level,
    quantize_to_powers,
    simplify_to_intervals,
)
from lambda_lab.sampling import mix64
from lambda_lab.witness import SUMMABLE, UNKNOWN

from oracles import frac, quantize_oracle

D = Dyadic
I = DyadicInterval
WINDOW = I(-4, 8)


def make_random_witness(seed: int, n_blocks: int = 24) -> PiecewiseWitness:
    """Deterministic pseudo-random step function on [-4, 8)."""
    blocks = []
    pos = D(-4)
    for i in range(n_blocks):
        r = mix64(seed, i)
        gap = D(r & 0x3F, 6)  # in [0, 1)
        width = D(((r >> 6) & 0x3F) + 1, 6)  # in (0, 1]
        level = D(((r >> 12) & 0x7F) + 1, 6)  # in (0, 2]
        lo = pos + gap
        hi = lo + width
        if hi >= D(8):
            break
        blocks.append((I(lo, hi), level))
        pos = hi
    return PiecewiseWitness(blocks)


class TestPositiveFloor:
    def test_cell_epsilon_uses_reach_window(self):
        lam = dyadic_ladder(12)
        f = indicator(I(0, 1))
        floored = add_positive_floor(f, lam, 2, I(-4, 8))
        # cell k=5 is [4, 5); points within reach 2 live in [2, 7)
        cnt = count_in(lam, D(2), D(5))
        bound = Fraction(1, 32) / cnt
        got = frac(floored.value(D(9, 1))) - frac(f.value(D(9, 1)))
        assert got <= bound < 2 * got  # largest power of two at most the bound

    def test_zero_witness_becomes_pure_floor(self):
        lam = dyadic_ladder(8)
        f = indicator(I(50, 51))  # vanishes on the window
        floored = add_positive_floor(f, lam, 2, WINDOW)
        for x in [D(-4), D(-1, 2), D(0), D(13, 1), D(31, 2)]:
            assert floored.value(x) > D(0)
            level = floored.value(x)
            assert level.is_pow2()

    def test_result_dominates_input(self):
        lam = dyadic_ladder(10)
        f = make_random_witness(3)
        floored = add_positive_floor(f, lam, 3, WINDOW)
        for i in range(-64, 128):
            x = D(i, 4)
            assert floored.value(x) >= f.value(x)

    def test_added_mass_below_one(self):
        # the added contribution to any translated sum from [-K, K] is
        # bounded by the sum of the cell constants' guarantees
        lam = dyadic_ladder(10)
        reach = 2
        f = indicator(I(50, 51))
        floored = add_positive_floor(f, lam, reach, WINDOW)
        ones = OnesWeights()
        for x in [D(-2), D(-1, 1), D(0), D(1), D(2)]:
            added = partial_sum(floored, lam, ones, x, D(10)).value
            base = partial_sum(f, lam, ones, x, D(10)).value
            assert frac(added) - frac(base) < 1

    def test_strictly_positive_on_window(self):
        lam = dyadic_ladder(10)
        f = make_random_witness(11)
        floored = add_positive_floor(f, lam, 2, WINDOW)
        for i in range(-64, 128):
            assert floored.value(D(i, 4)) > D(0)


class TestClip:
    def test_levels(self):
        f = PiecewiseWitness([(I(0, 1), D(2)), (I(1, 2), D(1, 1)), (I(2, 3), D(1))])
        clipped = clip_at_one(f)
        assert clipped.value(D(0)) == D(1)
        assert clipped.value(D(1)) == D(1, 1)
        assert clipped.value(D(2)) == D(1)

    def test_identity_when_already_bounded(self):
        f = PiecewiseWitness([(I(0, 1), D(1, 2)), (I(1, 2), D(3, 2))])
        clipped = clip_at_one(f)
        assert clipped.to_json() == f.to_json()


class TestQuantize:
    @pytest.mark.parametrize(
        "level,expect",
        [
            (D(3, 3), D(1, 2)),
            (D(1), D(1, 1)),
            (D(1, 7), D(1, 8)),
            (D(5, 3), D(1, 1)),
            (D(1, 1), D(1, 2)),
        ],
    )
    def test_vectors(self, level, expect):
        assert quantize_level(level) == expect

    def test_matches_search_oracle(self):
        for num in range(1, 64):
            v = Fraction(num, 64)
            got = frac(quantize_level(D(num, 6)))
            oracle = quantize_oracle(v)
            if v == 2 * oracle:  # exact power of two: strict rule drops a step
                assert got == oracle
            else:
                assert got == oracle

    def test_sandwich_everywhere(self):
        lam = dyadic_ladder(10)
        f2 = quantize_to_powers(clip_at_one(add_positive_floor(
            make_random_witness(17), lam, 2, WINDOW)))
        f1 = clip_at_one(add_positive_floor(make_random_witness(17), lam, 2, WINDOW))
        for i in range(-64, 128):
            x = D(i, 4)
            v1, v2 = f1.value(x), f2.value(x)
            if v1 > D(0):
                assert D(1, 1) * v1 <= v2
                assert v2 < v1

    def test_optional_left_normalisation(self):
        f = PiecewiseWitness([(I(-2, -1), D(1, 3)), (I(1, 2), D(3, 2))])
        g = quantize_to_powers(f, ones_below_zero_from=D(-4))
        assert g.value(D(-3)) == D(1)
        assert g.value(D(-3, 1)) == D(1)
        assert g.value(D(3, 1)) == D(1, 1)
        assert g.value(D(1, 1)) == D(0)  # untouched beyond the normalised zone


class TestSimplify:
    def test_identity_on_step_functions(self):
        lam = dyadic_ladder(8)
        f2 = quantize_to_powers(
            clip_at_one(add_positive_floor(make_random_witness(5), lam, 2, WINDOW))
        )
        rep = simplify_to_intervals(f2, lam, 2, WINDOW)
        assert rep.changed_measure == 0
        for i in range(-64, 128):
            x = D(i, 4)
            assert rep.witness.value(x) == f2.value(x)

    def test_default_delta_schedule(self):
        lam = dyadic_ladder(8)
        f2 = indicator(I(0, 1))
        rep = simplify_to_intervals(f2, lam, 2, I(0, 4))
        for k, delta in rep.deltas:
            assert delta == Fraction(1, 1 << k) / max(1, count_in(lam, D(k), D(2)))

    def test_delta_schedule_feeds_summable_criterion(self):
        lam = dyadic_ladder(10)
        rep = simplify_to_intervals(indicator(I(0, 1)), lam, 2, I(0, 8))
        deltas = dict(rep.deltas)

        def eps(x: int) -> Fraction:
            # decreasing upper bound for sum_{k >= x} delta_k
            return Fraction(2, 1 << max(x, 0))

        check = modification_series_check(lam, eps, 2, 10)
        assert check.verdict == SUMMABLE
        assert all(deltas[k] <= eps(k) for k in deltas)


class TestModificationSeries:
    def test_fast_decay_summable(self):
        # set extends past the horizon, so the geometric ratio test decides
        lam = dyadic_ladder(20)

        def eps(x):
            return Fraction(1, 1 << (2 * x)) if x >= 0 else Fraction(1 << (-2 * x))

        # terms 2^(-2(l-K)) * 2^l halve step over step
        check = modification_series_check(lam, eps, 2, 12)
        assert not check.tail_is_zero
        assert check.verdict == SUMMABLE
        assert check.ratio_max == Fraction(1, 2)

    def test_critical_rate_unknown(self):
        lam = dyadic_ladder(20)

        def eps(x):
            return Fraction(1, 1 << x) if x >= 0 else Fraction(1 << -x)

        check = modification_series_check(lam, eps, 2, 12)
        assert check.verdict == UNKNOWN
        # terms are exactly constant 2^K once the window clears the reach
        assert check.terms[6] == check.terms[10]

    def test_finite_set_always_summable(self):
        lam = dyadic_ladder(4)

        def eps(x):
            return Fraction(1 << 10, 1 << max(x, 0))

        check = modification_series_check(lam, eps, 2, 8)
        assert check.tail_is_zero
        assert check.verdict == SUMMABLE

    def test_eps_must_decrease(self):
        lam = dyadic_ladder(4)
        with pytest.raises(ValueError):
            modification_series_check(lam, lambda x: Fraction(abs(x) + 1), 2, 6)
