from fractions import Fraction

import pytest

from lambda_lab import Dyadic, DyadicInterval, DyadicSet, density_profile, translate_count
from lambda_lab.sampling import mix64

from oracles import frac, grid_count_in_set

D = Dyadic
I = DyadicInterval


def random_dyadic_set(seed: int, max_resolution: int = 10) -> DyadicSet:
    """Up to ~12 disjoint intervals with endpoints at resolution <= 10."""
    r = 4 + mix64(seed, 0) % (max_resolution - 3)
    cells = 1 << r
    intervals = []
    pos = 0
    i = 1
    while pos < cells and len(intervals) < 12:
        word = mix64(seed, i)
        i += 1
        gap = word % max(cells // 8, 2)
        width = 1 + (word >> 20) % max(cells // 8, 1)
        lo = pos + gap
        hi = min(lo + width, cells)
        if lo >= cells:
            break
        if lo < hi:
            intervals.append(I(D(lo, r), D(hi, r)))
        pos = hi + 1
    if not intervals:
        intervals = [I(D(0), D(1, r))]
    return DyadicSet(intervals)


class TestTranslateCount:
    def test_half_interval(self):
        c = DyadicSet([I(0, D(1, 1))])
        tc = translate_count(c, D(1, 4), -3)
        assert tc.count == 4
        assert tc.scaled == D(1, 1) == c.measure

    def test_full_set(self):
        c = DyadicSet([I(0, 1)])
        for x in [D(0), D(1, 3), D(5, 3)]:
            for n in (0, -1, -4):
                assert translate_count(c, x, n).scaled == D(1)

    def test_empty_set(self):
        c = DyadicSet([])
        assert translate_count(c, D(1, 2), -5).count == 0

    def test_matches_brute_force(self):
        for seed in range(30):
            c = random_dyadic_set(seed)
            intervals = [(frac(iv.lo), frac(iv.hi)) for iv in c.intervals]
            for xi in range(5):
                x = D(mix64(seed, 100 + xi) % (1 << 8), 8)
                for n in (0, -1, -3, -6):
                    got = translate_count(c, x, n).count
                    assert got == grid_count_in_set(intervals, frac(x), n)

    def test_periodicity_in_grid_steps(self):
        c = random_dyadic_set(3)
        x = D(5, 6)
        n = -4
        base = translate_count(c, x, n).count
        step = D(1, 4)
        y = x
        for _ in range(5):
            y = y + step
            if y < D(1):
                assert translate_count(c, y, n).count == base

    def test_x_must_be_in_unit_interval(self):
        c = DyadicSet([I(0, D(1, 1))])
        with pytest.raises(ValueError):
            translate_count(c, D(3, 1), -2)
        with pytest.raises(ValueError):
            translate_count(c, D(1, 2), 1)


class TestDensityProfile:
    def test_two_piece_profile(self):
        c = DyadicSet([I(0, D(1, 1)), I(D(3, 2), D(7, 3))])
        assert frac(c.measure) == Fraction(5, 8)
        prof = density_profile(c, D(1, 5), range(0, -9, -1))
        assert prof.first_guaranteed_level == -3
        for row in prof.rows:
            if row.guaranteed_exact:
                assert row.scaled == c.measure
                assert row.matches_measure

    def test_exact_from_resolution_onward(self):
        c = DyadicSet([I(0, D(1, 1)), I(D(3, 2), D(7, 3))])
        prof = density_profile(c, D(1, 5), [-3, -4, -5])
        assert all(r.matches_measure for r in prof.rows)
        assert prof.rows[0].scaled == D(5, 3)

    def test_coarse_level_can_deviate(self):
        c = DyadicSet([I(0, D(1, 2))])
        tc = translate_count(c, D(1, 3), -1)
        # spacing 1/2 cannot resolve measure 1/4: scaled is 0 or 1/2
        assert tc.scaled in (D(0), D(1, 1))
        assert tc.scaled != c.measure

    def test_profile_requires_decreasing_range(self):
        c = DyadicSet([I(0, D(1, 1))])
        with pytest.raises(ValueError):
            density_profile(c, D(0), [-1, -1])

    def test_monotone_refinement_sanity(self):
        # halving the spacing at most doubles the count, plus edge slack
        for seed in (1, 7, 21):
            c = random_dyadic_set(seed)
            x = D(mix64(seed, 999) % (1 << 8), 8)
            prev = None
            for n in range(0, -8, -1):
                cnt = translate_count(c, x, n).count
                if prev is not None:
                    assert cnt <= 2 * prev + 2 * len(c.intervals)
                    assert cnt >= prev  # refinement cannot lose grid points
                prev = cnt


class TestJson:
    def test_round_trip(self):
        c = random_dyadic_set(5)
        again = DyadicSet.from_json_list(c.to_json_list())
        assert again.to_json() == c.to_json()
        assert again.measure == c.measure
