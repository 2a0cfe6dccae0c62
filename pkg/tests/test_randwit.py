import math
from fractions import Fraction

import pytest

from lambda_lab import (
    Dyadic,
    DyadicInterval,
    ExplicitSet,
    PiecewiseWitness,
    RandomWitness,
    RefinementError,
    dyadic_ladder,
    ensemble_report,
    hit_statistics,
    indicator,
    indicator_frequencies,
    refine_partition,
)
from lambda_lab.sampling import bernoulli_pow2

from oracles import frac

D = Dyadic
I = DyadicInterval


class TestRefinement:
    def test_split_beats_min_gap(self):
        f3 = indicator(I(1, 2))
        lam = ExplicitSet([D(1), D(3, 1)])
        part = refine_partition(f3, lam, 1, I(-1, 1))
        assert len(part.intervals) == 4
        assert all(iv.length <= D(1, 2) for iv in part.intervals)
        assert all(iv.length < D(1, 1) for iv in part.intervals)
        assert part.kappas == [0, 0, 0, 0]

    def test_single_point_needs_no_split(self):
        f3 = indicator(I(1, 2))
        lam = ExplicitSet([D(1)])
        part = refine_partition(f3, lam, 1, I(-1, 1))
        assert len(part.intervals) == 1
        assert part.intervals[0] == I(1, 2)

    def test_levels_must_be_powers_of_two(self):
        f3 = PiecewiseWitness([(I(0, 1), D(3, 2))])
        with pytest.raises(RefinementError):
            refine_partition(f3, ExplicitSet([D(1)]), 1, I(-1, 1))

    def test_kappas_follow_levels(self, lacunary_demo):
        lam, witness = lacunary_demo
        part = refine_partition(witness, lam, 8, I(-8, 8))
        assert part.kappas == [1, 1, 1, 1, 2, 2, 2, 2]
        assert [str(iv.lo) for iv in part.intervals[:2]] == ["1/2^0", "7/2^2"]

    def test_at_most_one_lambda_per_piece_exhaustive(self, lacunary_demo):
        lam, witness = lacunary_demo
        part = refine_partition(witness, lam, 8, I(-8, 8))
        pts = list(lam.iter_points(D(-7), D(14), closed_hi=True))
        step = D(1, 8)
        x = D(-8)
        while x <= D(8):
            seen = {}
            for pt in pts:
                idx = part.piece_index(x + pt)
                if idx is not None:
                    assert idx not in seen, f"two points in piece {idx} at x={x}"
                    seen[idx] = pt
            x = x + step

    def test_provenance_hash_is_stable(self, lacunary_demo):
        lam, witness = lacunary_demo
        a = refine_partition(witness, lam, 8, I(-8, 8))
        b = refine_partition(witness, lam, 8, I(-8, 8))
        assert a.provenance == b.provenance and len(a.provenance) == 16


class TestRandomWitness:
    def test_outside_partition_is_zero(self, lacunary_demo):
        lam, witness = lacunary_demo
        part = refine_partition(witness, lam, 8, I(-8, 8))
        w = RandomWitness(part, 1)
        assert w.value(D(-50)) == 0
        assert w.value(D(100)) == 0

    def test_kappa_zero_always_one(self):
        f3 = indicator(I(1, 2))  # level 1 = 2^0
        part = refine_partition(f3, ExplicitSet([D(1)]), 1, I(-1, 1))
        for seed in range(25):
            assert RandomWitness(part, seed).value(D(5, 2)) == 1

    def test_deterministic_and_order_free(self, lacunary_demo):
        lam, witness = lacunary_demo
        part = refine_partition(witness, lam, 8, I(-8, 8))
        w = RandomWitness(part, 77)
        xs = [D(i, 3) for i in range(8, 48)]
        forward = [w.value(x) for x in xs]
        backward = [w.value(x) for x in reversed(xs)]
        assert forward == backward[::-1]
        again = RandomWitness(part, 77)
        assert forward == [again.value(x) for x in xs]

    def test_matches_raw_sampler(self, lacunary_demo):
        lam, witness = lacunary_demo
        part = refine_partition(witness, lam, 8, I(-8, 8))
        w = RandomWitness(part, 5)
        for n, iv in enumerate(part.intervals):
            assert w.value(iv.lo) == int(bernoulli_pow2(5, n, part.kappas[n]))


class TestIndicatorLaw:
    def test_frequencies_within_four_sigma(self, lacunary_demo):
        lam, witness = lacunary_demo
        part = refine_partition(witness, lam, 8, I(-8, 8))
        seeds = list(range(10_000))
        freqs = indicator_frequencies(part, seeds)
        for kappa, freq in zip(part.kappas, freqs):
            p = 0.5**kappa
            tol = 4 * math.sqrt(p * (1 - p) / len(seeds))
            assert abs(freq - p) <= tol

    def test_disjoint_seed_sets_agree(self, lacunary_demo):
        lam, witness = lacunary_demo
        part = refine_partition(witness, lam, 8, I(-8, 8))
        f1 = indicator_frequencies(part, list(range(0, 5000)))
        f2 = indicator_frequencies(part, list(range(5000, 10000)))
        for kappa, a, b in zip(part.kappas, f1, f2):
            p = 0.5**kappa
            sigma = math.sqrt(2 * p * (1 - p) / 5000)
            assert abs(a - b) < 5 * sigma

    def test_empty_seed_list(self, lacunary_demo):
        lam, witness = lacunary_demo
        part = refine_partition(witness, lam, 8, I(-8, 8))
        assert indicator_frequencies(part, []) == [0.0] * len(part.intervals)


class TestHitStatistics:
    def test_zero_witness_region(self, lacunary_demo):
        lam, witness = lacunary_demo
        part = refine_partition(witness, lam, 8, I(-8, 8))
        w = RandomWitness(part, 3)
        stats = hit_statistics(w, lam, D(-100), D(1 << 16))
        assert stats.hits == 0 and stats.expected == D(0)

    def test_expected_is_exact_translated_sum(self, lacunary_demo):
        lam, witness = lacunary_demo
        part = refine_partition(witness, lam, 8, I(-8, 8))
        w = RandomWitness(part, 3)
        stats = hit_statistics(w, lam, D(0), D(1 << 16))
        # independent recomputation over the explicit points
        expect = Fraction(0)
        for pt in [1, 2, 4, 8, 16]:
            v = witness.value(D(pt))
            expect += frac(v)
        assert frac(stats.expected) == expect
        assert stats.hits <= stats.terms

    def test_divergence_side_mean_hits(self):
        # wide half-level witness over the dense ladder: expectation 255
        lam = dyadic_ladder(8, k_min=1)
        f3 = PiecewiseWitness([(I(1, 9), D(1, 1))])
        part = refine_partition(f3, lam, 2, I(-1, 1))
        stats0 = hit_statistics(RandomWitness(part, 0), lam, D(0), D(9))
        e = float(frac(stats0.expected))
        assert e == 255.0
        piece_idx = [
            part.piece_index(pt)
            for pt in lam.iter_points(D(1), D(9), closed_hi=True)
        ]
        kappas = part.kappas
        n_seeds = 300
        total = 0
        for seed in range(n_seeds):
            total += sum(
                1 for i in piece_idx if i is not None and bernoulli_pow2(seed, i, kappas[i])
            )
        mean = total / n_seeds
        se = math.sqrt(510 * 0.25 / n_seeds)
        assert abs(mean - e) <= 5 * se
        assert abs(mean - e) <= 4 * math.sqrt(e)

    def test_convergence_side_hits_stabilize(self):
        # per-block levels 2^(-2k-2): late-horizon hit mass is tiny, so
        # nearly every seed stops accumulating hits after the midpoint
        lam = dyadic_ladder(8, k_min=1)
        f3 = PiecewiseWitness(
            [(I(k, k + 1), D(1, 2 * k + 2)) for k in range(1, 9)]
        )
        part = refine_partition(f3, lam, 2, I(-1, 1))
        mid = D(5)
        late = [
            part.piece_index(pt)
            for pt in lam.iter_points(mid, D(9), closed_hi=True)
            if pt > mid
        ]
        kappas = part.kappas
        stable = 0
        n_seeds = 500
        for seed in range(n_seeds):
            new_hits = any(
                i is not None and bernoulli_pow2(seed, i, kappas[i]) for i in late
            )
            stable += not new_hits
        assert stable / n_seeds >= 0.9


class TestEnsemble:
    def test_rows_and_freqs(self, lacunary_demo):
        lam, witness = lacunary_demo
        part = refine_partition(witness, lam, 8, I(-8, 8))
        horizons = [D(1), D(4), D(16)]
        rep = ensemble_report(part, lam, [0, 1, 2], [D(-3)], [D(0)], horizons)
        assert len(rep.rows) == 3 * 2 * 3
        for row in rep.rows:
            later = [
                r.hits
                for r in rep.rows
                if r.seed == row.seed and r.x == row.x and r.horizon >= row.horizon
            ]
            assert all(h >= row.hits for h in later)
        assert len(rep.interval_freqs) == len(part.intervals)

    def test_empty_seed_list_gives_empty_report(self, lacunary_demo):
        lam, witness = lacunary_demo
        part = refine_partition(witness, lam, 8, I(-8, 8))
        rep = ensemble_report(part, lam, [], [D(-3)], [D(0)], [D(1)])
        assert rep.rows == []
