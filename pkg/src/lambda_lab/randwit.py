"""Randomized characteristic functions over a refined interval family.

Each level interval of a power-of-two step witness is split into equal
dyadic pieces shorter than the smallest gap of the point set over the
reachable range.  That guarantees, for every x in the study window at once,
that at most one translated point x + lambda lands in any piece, so the
per-piece Bernoulli indicators stay independent along every translated
orbit.  Pieces are indexed in sorted order and the index is part of the
persisted artifact: a seed means the same sample tomorrow, on any machine,
from any thread.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dyadic import Dyadic, DyadicInterval
from .errors import RefinementError
from .sampling import bernoulli_pow2
from .sets import LambdaSet
from .witness import PiecewiseWitness, partial_sum
from .weights import OnesWeights

_ONES = OnesWeights()


@dataclass
class RefinedPartition:
    """Sorted disjoint pieces with their level exponents (level = 2^-kappa)."""

    intervals: list[DyadicInterval]
    kappas: list[int]
    study_window: DyadicInterval
    reach: int
    provenance: str = ""

    def __post_init__(self):
        if len(self.intervals) != len(self.kappas):
            raise ValueError("intervals and kappas must align")
        for a, b in zip(self.intervals, self.intervals[1:]):
            if not a.hi <= b.lo:
                raise ValueError("pieces must be disjoint and sorted")
        self._lo_keys = [iv.lo for iv in self.intervals]

    def piece_index(self, x) -> Optional[int]:
        import bisect

        if isinstance(x, float):
            lo, hi = 0, len(self.intervals)
            while lo < hi:
                mid = (lo + hi) // 2
                if self.intervals[mid].lo.as_float() <= x:
                    lo = mid + 1
                else:
                    hi = mid
            i = lo - 1
            if i >= 0 and x < self.intervals[i].hi.as_float():
                return i
            return None
        x = Dyadic.coerce(x)
        i = bisect.bisect_right(self._lo_keys, x) - 1
        if i >= 0 and x < self.intervals[i].hi:
            return i
        return None

    def level(self, i: int) -> Dyadic:
        return Dyadic.pow2(-self.kappas[i])

    def as_witness(self) -> PiecewiseWitness:
        return PiecewiseWitness(
            [(iv, Dyadic.pow2(-k)) for iv, k in zip(self.intervals, self.kappas)]
        )

    def to_json_dict(self) -> dict:
        return {
            "intervals": [[str(iv.lo), str(iv.hi)] for iv in self.intervals],
            "kappas": list(self.kappas),
            "study_window": [str(self.study_window.lo), str(self.study_window.hi)],
            "reach": self.reach,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def refine_partition(
    f3: PiecewiseWitness,
    lam: LambdaSet,
    reach: int,
    study_window: DyadicInterval,
) -> RefinedPartition:
    """Split the witness blocks so each piece meets each translated orbit at
    most once, for every x in the study window.

    The split uses the global minimum gap of the set over the reachable
    range [support_lo - window.hi, support_hi - window.lo], which is
    stronger than a per-x argument and makes the at-most-one property a
    theorem about the partition rather than about sampled grids.
    """
    blocks = list(f3.known_blocks())
    if not blocks:
        return RefinedPartition([], [], study_window, reach, _provenance(f3, lam, reach))
    for iv, level in blocks:
        if not (isinstance(level, Dyadic) and level.is_pow2() and level <= Dyadic(1)):
            raise RefinementError(
                f"level {level} on {iv} is not 2^-kappa with kappa >= 0"
            )
    reach_lo = blocks[0][0].lo - study_window.hi
    reach_hi = blocks[-1][0].hi - study_window.lo
    min_gap = lam.min_gap_in(reach_lo, reach_hi)
    if min_gap is not None and not Dyadic(0) < min_gap:
        raise RefinementError("point set has a zero gap in the reachable range")
    intervals: list[DyadicInterval] = []
    kappas: list[int] = []
    for iv, level in blocks:
        kappa = -level.log2_exact()
        t = 0
        if min_gap is not None:
            while not iv.length.shift(-t) < min_gap:
                t += 1
        for piece in iv.split(t):
            intervals.append(piece)
            kappas.append(kappa)
    return RefinedPartition(
        intervals, kappas, study_window, reach, _provenance(f3, lam, reach)
    )


def _provenance(f3: PiecewiseWitness, lam: LambdaSet, reach: int) -> str:
    blob = json.dumps(
        {
            "witness": f3.to_json_dict(),
            "set": lam.to_descriptor(),
            "reach": reach,
        },
        sort_keys=True,
    )
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


class RandomWitness:
    """One sampled indicator: value 2^-kappa_n pieces flip to one
    independently, decided by the stateless counter sampler."""

    def __init__(self, partition: RefinedPartition, seed: int):
        self.partition = partition
        self.seed = int(seed) & ((1 << 64) - 1)

    def indicator_bit(self, n: int) -> int:
        return 1 if bernoulli_pow2(self.seed, n, self.partition.kappas[n]) else 0

    def value(self, x) -> int:
        i = self.partition.piece_index(x)
        if i is None:
            return 0
        return self.indicator_bit(i)

    def __repr__(self):
        return f"<RandomWitness seed={self.seed} pieces={len(self.partition.intervals)}>"


@dataclass
class HitStats:
    hits: int
    expected: object  # exact Dyadic for dyadic sets, float otherwise
    terms: int


def hit_statistics(w: RandomWitness, lam: LambdaSet, x, lam_max) -> HitStats:
    """Observed count of sampled ones along the translated orbit of x,
    against its exact expectation sum of f3(x + lambda)."""
    lam_max = Dyadic.coerce(lam_max)
    hits = 0
    terms = 0
    for pt in lam.iter_points(lam.lower_bound(), lam_max, closed_hi=True):
        xv = (float(x) + pt) if isinstance(pt, float) else (Dyadic.coerce(x) + pt)
        hits += w.value(xv)
        terms += 1
    expected = partial_sum(w.partition.as_witness(), lam, _ONES, x, lam_max)
    return HitStats(hits, expected.value, terms)


@dataclass
class EnsembleRow:
    seed: int
    x: Dyadic
    horizon: Dyadic
    hits: int
    expected: object


@dataclass
class EnsembleReport:
    rows: list[EnsembleRow] = field(default_factory=list)
    interval_freqs: list[float] = field(default_factory=list)
    seeds: list[int] = field(default_factory=list)

    def csv_lines(self):
        yield "seed,x,horizon,hits,expected"
        for r in self.rows:
            exp = (
                str(r.expected)
                if isinstance(r.expected, Dyadic)
                else repr(float(r.expected))
            )
            yield f"{r.seed},{r.x},{r.horizon},{r.hits},{exp}"


def indicator_frequencies(
    partition: RefinedPartition, seeds: Sequence[int]
) -> list[float]:
    """Empirical per-piece frequency of the indicator over the seed list."""
    n_pieces = len(partition.intervals)
    if not seeds or n_pieces == 0:
        return [0.0] * n_pieces
    seed_arr = np.asarray(list(seeds), dtype=np.uint64)
    freqs = []
    for n, kappa in enumerate(partition.kappas):
        if kappa == 0:
            freqs.append(1.0)
            continue
        mixed = _mix64_array_seeds(seed_arr, n)
        hits = (mixed >> np.uint64(64 - kappa)) == 0
        freqs.append(float(hits.mean()))
    return freqs


def _mix64_array_seeds(seeds: np.ndarray, index: int) -> np.ndarray:
    # same mixing as sampling.mix64, vectorised over seeds at one index
    golden = np.uint64(0x9E3779B97F4A7C15)
    with np.errstate(over="ignore"):
        z = seeds ^ (np.uint64(index) * golden)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def ensemble_report(
    partition: RefinedPartition,
    lam: LambdaSet,
    seeds: Sequence[int],
    c_grid: Sequence,
    d_grid: Sequence,
    horizons: Sequence,
) -> EnsembleReport:
    """Per-seed, per-point hit trajectories plus per-piece frequencies.

    Work items are independent in (seed, x); rows come out in sorted
    (seed, x, horizon) order no matter how the work was scheduled.
    """
    report = EnsembleReport(seeds=list(seeds))
    horizons = [Dyadic.coerce(h) for h in horizons]
    grid = [Dyadic.coerce(x) for x in list(c_grid) + list(d_grid)]
    witness = partition.as_witness()
    expected_cache = {}
    for x in grid:
        for h in horizons:
            expected_cache[(x, h)] = partial_sum(witness, lam, _ONES, x, h).value
    points = list(lam.iter_points(lam.lower_bound(), horizons[-1], closed_hi=True))
    for seed in report.seeds:
        w = RandomWitness(partition, seed)
        for x in grid:
            hit_positions = []
            for pt in points:
                xv = (float(x) + pt) if isinstance(pt, float) else (x + pt)
                if w.value(xv):
                    hit_positions.append(pt)
            for h in horizons:
                hf = h.as_float()
                hits = sum(
                    1
                    for pt in hit_positions
                    if (pt <= hf if isinstance(pt, float) else pt <= h)
                )
                report.rows.append(
                    EnsembleRow(seed, x, h, hits, expected_cache[(x, h)])
                )
    report.interval_freqs = indicator_frequencies(partition, report.seeds)
    return report
