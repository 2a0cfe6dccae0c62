"""Discrete point sets: dyadic block lattices, log-integer sets, explicit
lists, and reproducible random thinnings.

Counting on block lattices is closed-form (no enumeration), which keeps
window queries exact and fast even when a window holds millions of points.
Enumeration materialises points and is guarded by a configurable cap.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional, Union

import numpy as np

from .dyadic import Dyadic, DyadicInterval, floor_to_grid
from .errors import (
    NestedThinningError,
    ParseError,
    WindowTooLargeError,
)
from .sampling import bernoulli, bernoulli_array

DEFAULT_CAP = 10**8

Point = Union[Dyadic, float]


def enumeration_cap() -> int:
    """Point cap for any operation that walks points one by one."""
    raw = os.environ.get("LAMBDA_LAB_CAP")
    if raw is None:
        return DEFAULT_CAP
    try:
        return int(raw)
    except ValueError as exc:
        raise ParseError(f"LAMBDA_LAB_CAP={raw!r} is not an integer") from exc


def _check_cap(n: int) -> None:
    cap = enumeration_cap()
    if n > cap:
        raise WindowTooLargeError(n, cap)


class LambdaSet:
    """Common interface of all point-set kinds.

    Points are strictly increasing and bounded below; the global rank of a
    point (its 0-based position in increasing order) is the key used both
    for weights and for thinning decisions.
    """

    kind = "abstract"

    def total_count(self) -> int:
        raise NotImplementedError

    def count_below(self, x) -> int:
        """Number of points strictly below x."""
        raise NotImplementedError

    def count_upto(self, x) -> int:
        """Number of points <= x."""
        raise NotImplementedError

    def count_range(self, lo, hi, closed_hi: bool = False) -> int:
        upper = self.count_upto(hi) if closed_hi else self.count_below(hi)
        return max(0, upper - self.count_below(lo))

    def point_at(self, rank: int) -> Point:
        raise NotImplementedError

    def iter_points(self, lo, hi, closed_hi: bool = False) -> Iterator[Point]:
        for _, pt in self.iter_indexed(lo, hi, closed_hi):
            yield pt

    def iter_indexed(self, lo, hi, closed_hi: bool = False) -> Iterator[tuple[int, Point]]:
        """Yield (global rank, point) over the window, in increasing order."""
        raise NotImplementedError

    def first_point(self) -> Point:
        return self.point_at(0)

    def last_point(self) -> Point:
        return self.point_at(self.total_count() - 1)

    def lower_bound(self) -> Dyadic:
        """A cheap dyadic lower bound for every point of the set."""
        raise NotImplementedError

    def min_gap_in(self, lo, hi) -> Optional[Point]:
        """Smallest gap between consecutive points of the closed window, or
        None when the window holds fewer than two points."""
        raise NotImplementedError

    def to_descriptor(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.to_descriptor()}>"


class DyadicBlockSet(LambdaSet):
    """Union of lattice blocks 2^-m_k * Z intersected with [n_k, n_{k+1})."""

    kind = "dyadic_blocks"

    def __init__(self, blocks):
        cleaned = []
        prev_hi = None
        for m, n_lo, n_hi in blocks:
            if m < 0 or n_lo >= n_hi:
                raise ValueError(f"bad block (m={m}, [{n_lo}, {n_hi}))")
            if prev_hi is not None and n_lo < prev_hi:
                raise ValueError("blocks must be ordered and non-overlapping")
            prev_hi = n_hi
            cleaned.append((int(m), int(n_lo), int(n_hi)))
        if not cleaned:
            raise ValueError("need at least one block")
        self.blocks = tuple(cleaned)
        self._counts = [(n_hi - n_lo) << m for m, n_lo, n_hi in cleaned]
        self._cum = [0]
        for c in self._counts:
            self._cum.append(self._cum[-1] + c)

    def total_count(self) -> int:
        return self._cum[-1]

    def _points_below_in_block(self, b: int, x: Dyadic) -> int:
        m, n_lo, n_hi = self.blocks[b]
        j_lo = n_lo << m
        j_hi = n_hi << m
        j_x = x.shift(m).ceil_int()  # first lattice index >= x
        return min(max(j_x, j_lo), j_hi) - j_lo

    def _points_upto_in_block(self, b: int, x: Dyadic) -> int:
        m, n_lo, n_hi = self.blocks[b]
        j_lo = n_lo << m
        j_hi = n_hi << m
        j_x = x.shift(m).floor_int() + 1  # first lattice index > x
        return min(max(j_x, j_lo), j_hi) - j_lo

    def count_below(self, x) -> int:
        x = Dyadic.coerce(x)
        total = 0
        for b, (_, n_lo, n_hi) in enumerate(self.blocks):
            if x <= Dyadic(n_lo):
                break
            if x >= Dyadic(n_hi):
                total += self._counts[b]
            else:
                total += self._points_below_in_block(b, x)
                break
        return total

    def count_upto(self, x) -> int:
        x = Dyadic.coerce(x)
        total = 0
        for b, (_, n_lo, n_hi) in enumerate(self.blocks):
            if x < Dyadic(n_lo):
                break
            if x >= Dyadic(n_hi):
                total += self._counts[b]
            else:
                total += self._points_upto_in_block(b, x)
                break
        return total

    def point_at(self, rank: int) -> Dyadic:
        if rank < 0 or rank >= self._cum[-1]:
            raise IndexError(rank)
        import bisect

        b = bisect.bisect_right(self._cum, rank) - 1
        m, n_lo, _ = self.blocks[b]
        j = (n_lo << m) + (rank - self._cum[b])
        return Dyadic(j, m)

    def lattice_slices(self, lo, hi, closed_hi: bool = False):
        """Per-block (m, j_start, j_stop, rank_start) triples for the window.

        j runs over lattice indices at scale 2^-m; exactness is preserved
        because the indices, not floats, represent the points.
        """
        lo = Dyadic.coerce(lo)
        hi = Dyadic.coerce(hi)
        out = []
        for b, (m, n_lo, n_hi) in enumerate(self.blocks):
            j_blk_lo, j_blk_hi = n_lo << m, n_hi << m
            j0 = max(j_blk_lo, lo.shift(m).ceil_int())
            if closed_hi:
                j1 = min(j_blk_hi, hi.shift(m).floor_int() + 1)
            else:
                j1 = min(j_blk_hi, hi.shift(m).ceil_int())
            if j0 < j1:
                out.append((m, j0, j1, self._cum[b] + (j0 - j_blk_lo)))
        return out

    def iter_indexed(self, lo, hi, closed_hi: bool = False):
        slices = self.lattice_slices(lo, hi, closed_hi)
        _check_cap(sum(j1 - j0 for _, j0, j1, _ in slices))
        raw = Dyadic._raw
        for m, j0, j1, rank0 in slices:
            for off, j in enumerate(range(j0, j1)):
                if j == 0:
                    yield rank0 + off, raw(0, 0)
                else:
                    tz = (j & -j).bit_length() - 1
                    if tz >= m:
                        yield rank0 + off, raw(j >> m, 0)
                    else:
                        yield rank0 + off, raw(j >> tz, m - tz)

    def min_gap_in(self, lo, hi):
        lo = Dyadic.coerce(lo)
        hi = Dyadic.coerce(hi)
        best = None
        prev_last = None
        for m, j0, j1, _ in self.lattice_slices(lo, hi, closed_hi=True):
            first = Dyadic(j0, m)
            last = Dyadic(j1 - 1, m)
            if prev_last is not None:
                gap = first - prev_last
                if best is None or gap < best:
                    best = gap
            if j1 - j0 >= 2:
                gap = Dyadic(1, m)
                if best is None or gap < best:
                    best = gap
            prev_last = last
        return best

    def lower_bound(self) -> Dyadic:
        return Dyadic(self.blocks[0][1])

    def to_descriptor(self) -> dict:
        return {
            "kind": self.kind,
            "blocks": [
                {"m": m, "n_lo": n_lo, "n_hi": n_hi} for m, n_lo, n_hi in self.blocks
            ],
        }


class ExplicitSet(LambdaSet):
    """A finite, explicitly listed point set."""

    kind = "explicit"

    def __init__(self, points):
        pts = [Dyadic.coerce(p) for p in points]
        for a, b in zip(pts, pts[1:]):
            if not a < b:
                raise ValueError("points must be strictly increasing")
        if not pts:
            raise ValueError("need at least one point")
        self.points = tuple(pts)

    def total_count(self) -> int:
        return len(self.points)

    def _bisect(self, x: Dyadic, strict: bool) -> int:
        lo, hi = 0, len(self.points)
        while lo < hi:
            mid = (lo + hi) // 2
            p = self.points[mid]
            if p < x or (not strict and p == x):
                lo = mid + 1
            else:
                hi = mid
        return lo

    def count_below(self, x) -> int:
        return self._bisect(Dyadic.coerce(x), strict=True)

    def count_upto(self, x) -> int:
        return self._bisect(Dyadic.coerce(x), strict=False)

    def point_at(self, rank: int) -> Dyadic:
        return self.points[rank]

    def iter_indexed(self, lo, hi, closed_hi: bool = False):
        i0 = self.count_below(Dyadic.coerce(lo))
        i1 = self.count_upto(hi) if closed_hi else self.count_below(hi)
        for i in range(i0, i1):
            yield i, self.points[i]

    def min_gap_in(self, lo, hi):
        pts = [p for _, p in self.iter_indexed(lo, hi, closed_hi=True)]
        if len(pts) < 2:
            return None
        return min(b - a for a, b in zip(pts, pts[1:]))

    def lower_bound(self) -> Dyadic:
        return self.points[0]

    def to_descriptor(self) -> dict:
        return {"kind": self.kind, "points": [str(p) for p in self.points]}


class LogIntegerSet(LambdaSet):
    """The points ln(n) for n = 1..max_n, rendered as binary64.

    Window membership is resolved by integer search on n, never by comparing
    rounded logarithms, so counts are exact; the point values themselves are
    binary64 with the documented one-ulp-per-term budget downstream.
    """

    kind = "log_integers"

    def __init__(self, max_n: int):
        if max_n < 1:
            raise ValueError("max_n must be >= 1")
        self.max_n = int(max_n)

    def total_count(self) -> int:
        return self.max_n

    @staticmethod
    def _first_n_at_or_above(x) -> int:
        """Smallest n >= 1 with ln(n) >= x, by integer search."""
        if isinstance(x, Dyadic):
            xf = x.as_float()
            x_cmp = x.as_fraction()
        else:
            xf = float(x)
            x_cmp = Fraction(xf)
        if xf <= 0:
            return 1
        import mpmath

        guess = int(math.floor(math.exp(xf))) if xf < 700 else None
        if guess is None:
            raise ValueError("window endpoint too large for log-integer search")
        n = max(1, guess - 2)
        with mpmath.workdps(60):
            target = mpmath.mpf(x_cmp.numerator) / x_cmp.denominator
            while mpmath.log(n) < target:
                n += 1
        return n

    def count_below(self, x) -> int:
        n = self._first_n_at_or_above(x)
        # ln(n) >= x first holds at n, so exactly n-1 points lie below x
        # (ln(n) == x is only possible at n = 1, x = 0, which counts as not
        # below).
        return min(n - 1, self.max_n)

    def count_upto(self, x) -> int:
        n = self._first_n_at_or_above(x)
        if n == 1:
            xf = x.as_float() if isinstance(x, Dyadic) else float(x)
            is_zero = (x == Dyadic(0)) if isinstance(x, Dyadic) else (xf == 0.0)
            return 1 if (is_zero or xf > 0) else 0
        # does ln(n) equal x exactly? impossible for rational x > 0.
        return min(n - 1, self.max_n)

    def point_at(self, rank: int) -> float:
        if rank < 0 or rank >= self.max_n:
            raise IndexError(rank)
        return math.log(rank + 1)

    def iter_indexed(self, lo, hi, closed_hi: bool = False):
        n0 = self._first_n_at_or_above(lo)
        n1 = self._first_n_at_or_above(hi)
        if closed_hi:
            # closed top: include n with ln(n) == hi; only n=1, hi=0 qualifies.
            hi_f = hi.as_float() if isinstance(hi, Dyadic) else float(hi)
            if n1 == 1 and hi_f == 0.0:
                n1 = 2
        n1 = min(n1, self.max_n + 1)
        _check_cap(max(0, n1 - n0))
        for n in range(n0, n1):
            yield n - 1, math.log(n)

    def min_gap_in(self, lo, hi):
        pts = [p for _, p in self.iter_indexed(lo, hi, closed_hi=True)]
        if len(pts) < 2:
            return None
        # gaps ln(n+1) - ln(n) decrease, so the last pair is the smallest
        return pts[-1] - pts[-2]

    def lower_bound(self) -> Dyadic:
        return Dyadic(0)

    def to_descriptor(self) -> dict:
        return {"kind": self.kind, "max_n": self.max_n}


class ThinnedSet(LambdaSet):
    """Random subset of a base set: the point of base rank k is kept exactly
    when the counter-based draw bernoulli(seed, k, p) succeeds.

    Membership depends only on (seed, rank), so it never changes with the
    query window, the evaluation order, or the thread count.
    """

    kind = "thinned"

    def __init__(self, base: LambdaSet, p, seed: int):
        if isinstance(base, ThinnedSet):
            raise NestedThinningError("thinning a thinned set is not supported")
        p = Dyadic.coerce(p)
        if not (Dyadic(0) < p and p < Dyadic(1)):
            raise ValueError(f"keep probability {p} outside (0, 1)")
        self.base = base
        self.p = p
        self.seed = int(seed) & ((1 << 64) - 1)

    def keeps(self, base_rank: int) -> bool:
        return bernoulli(self.seed, base_rank, self.p)

    def _kept_mask(self, rank0: int, rank1: int) -> np.ndarray:
        _check_cap(rank1 - rank0)
        idx = np.arange(rank0, rank1, dtype=np.uint64)
        return bernoulli_array(self.seed, idx, self.p)

    def total_count(self) -> int:
        base_total = self.base.total_count()
        return int(self._kept_mask(0, base_total).sum())

    def count_range(self, lo, hi, closed_hi: bool = False) -> int:
        r0 = self.base.count_below(lo)
        r1 = self.base.count_upto(hi) if closed_hi else self.base.count_below(hi)
        if r1 <= r0:
            return 0
        return int(self._kept_mask(r0, r1).sum())

    def count_below(self, x) -> int:
        r1 = self.base.count_below(x)
        if r1 == 0:
            return 0
        return int(self._kept_mask(0, r1).sum())

    def count_upto(self, x) -> int:
        r1 = self.base.count_upto(x)
        if r1 == 0:
            return 0
        return int(self._kept_mask(0, r1).sum())

    def point_at(self, rank: int) -> Point:
        # Scan retained points from the base start; desk-scale only.
        seen = -1
        base_total = self.base.total_count()
        chunk = 1 << 16
        for start in range(0, base_total, chunk):
            stop = min(start + chunk, base_total)
            mask = self._kept_mask(start, stop)
            hits = int(mask.sum())
            if seen + hits >= rank:
                for off in np.nonzero(mask)[0]:
                    seen += 1
                    if seen == rank:
                        return self.base.point_at(start + int(off))
            else:
                seen += hits
        raise IndexError(rank)

    def iter_indexed(self, lo, hi, closed_hi: bool = False):
        # Ranks within the thinned set require counting retained points
        # below the window; this walks the base from its start.
        r0 = self.base.count_below(lo)
        rank = int(self._kept_mask(0, r0).sum()) if r0 else 0
        for base_rank, pt in self.base.iter_indexed(lo, hi, closed_hi):
            if self.keeps(base_rank):
                yield rank, pt
                rank += 1

    def iter_points(self, lo, hi, closed_hi: bool = False):
        for base_rank, pt in self.base.iter_indexed(lo, hi, closed_hi):
            if self.keeps(base_rank):
                yield pt

    def min_gap_in(self, lo, hi):
        pts = list(self.iter_points(lo, hi, closed_hi=True))
        if len(pts) < 2:
            return None
        return min(b - a for a, b in zip(pts, pts[1:]))

    def first_point(self) -> Point:
        return self.point_at(0)

    def lower_bound(self) -> Dyadic:
        return self.base.lower_bound()

    def to_descriptor(self) -> dict:
        return {
            "kind": self.kind,
            "base": self.base.to_descriptor(),
            "p": str(self.p),
            "seed": self.seed,
        }


# ----------------------------------------------------------------------
# constructors and descriptor round-trip

def dyadic_ladder(k_max: int, k_min: int = 0) -> DyadicBlockSet:
    """Blocks 2^-k Z on [k, k+1) for k_min <= k <= k_max.

    With k_min=0 the unit window [k, k+1) holds exactly 2^k points for every
    k in range, including [0, 1) = {0}.
    """
    if k_max < k_min:
        raise ValueError("k_max must be >= k_min")
    return DyadicBlockSet([(k, k, k + 1) for k in range(k_min, k_max + 1)])


def powers_of_two(j_max: int, j_min: int = 0) -> ExplicitSet:
    return ExplicitSet([Dyadic(1 << j) for j in range(j_min, j_max + 1)])


def thin(base: LambdaSet, p, seed: int) -> ThinnedSet:
    return ThinnedSet(base, p, seed)


def from_descriptor(desc: dict) -> LambdaSet:
    try:
        kind = desc["kind"]
        if kind == "dyadic_blocks":
            return DyadicBlockSet(
                [(b["m"], b["n_lo"], b["n_hi"]) for b in desc["blocks"]]
            )
        if kind == "explicit":
            return ExplicitSet([Dyadic.parse(p) for p in desc["points"]])
        if kind == "log_integers":
            return LogIntegerSet(desc["max_n"])
        if kind == "thinned":
            return ThinnedSet(
                from_descriptor(desc["base"]), Dyadic.parse(desc["p"]), desc["seed"]
            )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad set descriptor: {desc!r}") from exc
    raise ParseError(f"unknown set kind {desc.get('kind')!r}")


# ----------------------------------------------------------------------
# window queries

def enumerate_range(lam: LambdaSet, window: DyadicInterval) -> list:
    """All points of the set in [window.lo, window.hi), sorted."""
    return list(lam.iter_points(window.lo, window.hi))


def count_in(lam: LambdaSet, x, a) -> int:
    """Number of points in the half-open window [x, x+a)."""
    x = Dyadic.coerce(x)
    a = Dyadic.coerce(a)
    if not Dyadic(0) < a:
        raise ValueError("window length must be positive")
    return lam.count_range(x, x + a)


@dataclass
class GapStats:
    """Gap report below a horizon.

    empty_windows lists the start indices j of length-`window_len` windows
    [j*w, (j+1)*w) that contain no point; with the default unit windows these
    are the integers a with [a, a+1) disjoint from the set.
    """

    horizon: Dyadic
    window_len: Dyadic
    max_gap: Optional[Point]
    max_gap_after: Optional[Point]
    empty_windows: list = field(default_factory=list)


def lacunarity_scan(lam: LambdaSet, horizon, window_len=1) -> GapStats:
    horizon = Dyadic.coerce(horizon)
    w = Dyadic.coerce(window_len)
    empty = []
    j = 0
    while True:
        lo = w * Dyadic(j)
        hi = w * Dyadic(j + 1)
        if hi > horizon:
            break
        if lam.count_range(lo, hi) == 0:
            empty.append(j)
        j += 1
    max_gap, after = _max_gap_below(lam, horizon)
    return GapStats(horizon, w, max_gap, after, empty)


def _max_gap_below(lam: LambdaSet, horizon: Dyadic):
    if isinstance(lam, DyadicBlockSet):
        best = None
        after = None
        prev_last = None
        for m, j0, j1, _ in lam.lattice_slices(Dyadic(0), horizon):
            first = Dyadic(j0, m)
            last = Dyadic(j1 - 1, m)
            if prev_last is not None:
                gap = first - prev_last
                if best is None or gap > best:
                    best, after = gap, prev_last
            if j1 - j0 >= 2:
                gap = Dyadic(1, m)
                if best is None or gap > best:
                    best, after = gap, first
            prev_last = last
        return best, after
    if isinstance(lam, LogIntegerSet):
        pts = []
        for _, p in lam.iter_indexed(0.0, horizon.as_float()):
            pts.append(p)
            if len(pts) == 2:
                break
        if len(pts) < 2:
            return None, None
        return pts[1] - pts[0], pts[0]  # gaps shrink, the first is largest
    best = None
    after = None
    prev = None
    for p in lam.iter_points(_lowest_query_point(lam), horizon):
        if prev is not None:
            gap = p - prev
            if best is None or gap > best:
                best, after = gap, prev
        prev = p
    return best, after


def _lowest_query_point(lam: LambdaSet) -> Dyadic:
    return lam.lower_bound()


# ----------------------------------------------------------------------
# density lower-bound check for thinned lattices

@dataclass
class DensityBoundRow:
    x: Dyadic
    holds: bool
    lhs: int
    rhs: Dyadic


def density_bound_check(lam: LambdaSet, p, level: int, xs) -> list[DensityBoundRow]:
    """Compare #(set in [x, x+2^-L)) against p*2^(floor(x)-L-2) exactly."""
    p = Dyadic.coerce(p)
    if level < 0:
        raise ValueError("level must be nonnegative")
    out = []
    width = Dyadic.pow2(-level)
    for x in xs:
        x = Dyadic.coerce(x)
        if x < Dyadic(0):
            raise ValueError("grid points must be nonnegative")
        j = x.floor_int()
        lhs = lam.count_range(x, x + width)
        rhs = p.shift(j - level - 2)
        out.append(DensityBoundRow(x, Dyadic(lhs) > rhs, lhs, rhs))
    return out


# ----------------------------------------------------------------------
# empty-window (deletion) event probabilities

@dataclass
class GapEventProbability:
    """P(some unit window of a block loses all its points).

    exact is a Fraction when the closed form fits the bit budget, else None;
    approx is always populated.
    """

    exact: Optional[Fraction]
    approx: float

    @property
    def exact_available(self) -> bool:
        return self.exact is not None


def empty_window_probability(
    m: int, q, block_len: int, exact_bit_budget: int = 1 << 22
) -> GapEventProbability:
    """1 - (1 - q^(2^m))^block_len, exactly when affordable."""
    if m < 0 or block_len < 0:
        raise ValueError("m and block_len must be nonnegative")
    q = Dyadic.coerce(q)
    if not (Dyadic(0) < q and q < Dyadic(1)):
        raise ValueError(f"deletion probability {q} outside (0, 1)")
    if block_len == 0:
        return GapEventProbability(Fraction(0), 0.0)
    qf = q.as_fraction()
    bits = (1 << m) * max(
        qf.numerator.bit_length(), qf.denominator.bit_length()
    ) * (block_len + 1)
    exact = None
    if bits <= exact_bit_budget:
        z = qf ** (1 << m)
        exact = 1 - (1 - z) ** block_len
    ln_q = math.log(q.as_float())
    arg = math.ldexp(ln_q, m)  # 2^m * ln(q), -inf when it underflows
    z_f = math.exp(arg)
    approx = -math.expm1(block_len * math.log1p(-z_f)) if z_f < 1.0 else 1.0
    if exact is not None:
        approx = float(exact)
    return GapEventProbability(exact, approx)


@dataclass
class GapSeriesReport:
    terms: list[float]
    partials: list[float]
    trend: str  # "diverging", "flattening", or "short-run"


def empty_window_series(
    ms: Callable[[int], int], ns: Callable[[int], int], q, k_max: int
) -> GapSeriesReport:
    """Partial sums of the per-block empty-window probabilities.

    ms and ns map the 1-based block index k to m_k and n_k; block k spans
    [n_k, n_{k+1}).  The trend label compares the last ten terms' increment
    against the first ten terms' and is purely advisory.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    terms = []
    partials = []
    total = 0.0
    for k in range(1, k_max + 1):
        block_len = ns(k + 1) - ns(k)
        if block_len < 0:
            raise ValueError("n_k must be nondecreasing")
        term = empty_window_probability(ms(k), q, block_len).approx
        terms.append(term)
        total += term
        partials.append(total)
    if k_max >= 20:
        first = partials[9]
        last = partials[-1] - partials[-11]
        trend = "diverging" if last >= 0.5 * first else "flattening"
    else:
        trend = "short-run"
    return GapSeriesReport(terms, partials, trend)


def simulate_gap_events(
    m: int, block_len: int, q, seeds, base_rank_offset: int = 0
) -> np.ndarray:
    """Monte Carlo of the empty-window event under real thinning semantics.

    For each seed, a block of block_len unit windows with 2^m points each is
    thinned with keep probability 1-q (same sampler and rank convention as
    ThinnedSet); the event fires when any window retains nothing.
    """
    q = Dyadic.coerce(q)
    p = Dyadic(1) - q
    per_window = 1 << m
    n_points = per_window * block_len
    idx = np.arange(base_rank_offset, base_rank_offset + n_points, dtype=np.uint64)
    out = np.empty(len(seeds), dtype=bool)
    for i, s in enumerate(seeds):
        kept = bernoulli_array(int(s), idx, p).reshape(block_len, per_window)
        out[i] = bool((~kept.any(axis=1)).any())
    return out
