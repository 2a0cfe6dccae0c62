"""Step-function witnesses and exact translated-sum evaluation.

A witness is a stream of (half-open dyadic interval, positive level) blocks,
pairwise disjoint and sorted.  Levels are exact (Dyadic, or Fraction for
derived levels such as reciprocal block sums); evaluation off the blocks is
zero.  A witness may be backed by a generator that produces blocks in
increasing position order, in which case evaluation materialises blocks
lazily up to the largest position ever queried.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence, Union

from .dyadic import Dyadic, DyadicInterval
from .errors import GeneratorExhaustedError, ParseError
from .sets import LambdaSet, count_in
from .weights import OnesWeights, WeightSeq

Level = Union[Dyadic, Fraction, float]


def _level_positive(level: Level) -> bool:
    if isinstance(level, Dyadic):
        return level.mantissa > 0
    return level > 0


class PiecewiseWitness:
    """Nonnegative step function given by disjoint sorted blocks."""

    def __init__(self, blocks: Iterable = (), generator: Optional[Iterator] = None,
                 max_blocks: int = 10**6):
        self._blocks: list[tuple[DyadicInterval, Level]] = []
        self._lo_keys: list[Dyadic] = []
        self._gen = generator
        self._gen_done = generator is None
        self._max_blocks = max_blocks
        for blk in blocks:
            self._append(blk)

    def _append(self, blk) -> None:
        iv, level = blk
        if not isinstance(iv, DyadicInterval):
            iv = DyadicInterval(*iv)
        if not _level_positive(level):
            raise ValueError(f"level {level} must be positive")
        if self._blocks and not self._blocks[-1][0].hi <= iv.lo:
            raise ValueError("blocks must be disjoint and sorted by position")
        if len(self._blocks) >= self._max_blocks:
            raise GeneratorExhaustedError(
                f"witness exceeded {self._max_blocks} blocks"
            )
        self._blocks.append((iv, level))
        self._lo_keys.append(iv.lo)

    def _ensure_through(self, x: Dyadic) -> None:
        """Pull generated blocks until one starts beyond x or none remain."""
        if self._gen_done:
            return
        while not self._blocks or not self._blocks[-1][0].lo > x:
            try:
                self._append(next(self._gen))
            except StopIteration:
                self._gen_done = True
                return

    @property
    def is_complete(self) -> bool:
        return self._gen_done

    def known_blocks(self) -> Sequence[tuple[DyadicInterval, Level]]:
        return tuple(self._blocks)

    def blocks_through(self, x) -> Sequence[tuple[DyadicInterval, Level]]:
        self._ensure_through(Dyadic.coerce(x))
        return tuple(self._blocks)

    def snapshot(self, through) -> "PiecewiseWitness":
        """Immutable finite witness holding every block starting at or
        before `through`; safe to share across threads."""
        through = Dyadic.coerce(through)
        self._ensure_through(through)
        kept = [b for b in self._blocks if b[0].lo <= through]
        return PiecewiseWitness(kept)

    # ------------------------------------------------------------------
    # evaluation

    def value(self, x) -> Level:
        """f(x); exact half-open semantics for dyadic x, float fallback for
        float x (log-integer translates)."""
        if isinstance(x, float):
            return self._value_float(x)
        x = Dyadic.coerce(x)
        self._ensure_through(x)
        i = bisect.bisect_right(self._lo_keys, x) - 1
        if i >= 0:
            iv, level = self._blocks[i]
            if x < iv.hi:
                return level
        return Dyadic(0)

    def _value_float(self, x: float) -> Level:
        if self._gen is not None and not self._gen_done:
            self._ensure_through(Dyadic.coerce(int(math.ceil(x)) + 1))
        lo = 0
        hi = len(self._blocks)
        while lo < hi:
            mid = (lo + hi) // 2
            if self._blocks[mid][0].lo.as_float() <= x:
                lo = mid + 1
            else:
                hi = mid
        i = lo - 1
        if i >= 0:
            iv, level = self._blocks[i]
            if x < iv.hi.as_float():
                return level
        return Dyadic(0)

    def support_lo(self) -> Optional[Dyadic]:
        if not self._blocks and not self._gen_done:
            self._ensure_through(Dyadic(0))
        return self._blocks[0][0].lo if self._blocks else None

    def known_hi(self) -> Optional[Dyadic]:
        return self._blocks[-1][0].hi if self._blocks else None

    def levels_are_pow2(self) -> bool:
        return all(
            isinstance(level, Dyadic) and level.is_pow2()
            for _, level in self._blocks
        )

    def is_exact(self) -> bool:
        return all(not isinstance(level, float) for _, level in self._blocks)

    def map_levels(self, fn) -> "PiecewiseWitness":
        return PiecewiseWitness(
            merge_blocks((iv, fn(level)) for iv, level in self._blocks)
        )

    # ------------------------------------------------------------------
    # serialization

    def to_json_dict(self) -> dict:
        blocks = []
        for iv, level in self._blocks:
            blocks.append(
                {"lo": str(iv.lo), "hi": str(iv.hi), "level": _level_str(level)}
            )
        return {"blocks": blocks}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, data: dict) -> "PiecewiseWitness":
        try:
            blocks = [
                (
                    DyadicInterval(Dyadic.parse(b["lo"]), Dyadic.parse(b["hi"])),
                    _level_parse(b["level"]),
                )
                for b in data["blocks"]
            ]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad witness JSON: {data!r}") from exc
        return cls(blocks)

    def __repr__(self):
        n = len(self._blocks)
        tail = "" if self._gen_done else "+gen"
        return f"<PiecewiseWitness {n} blocks{tail}>"


def _level_str(level: Level) -> str:
    if isinstance(level, Dyadic):
        return str(level)
    if isinstance(level, Fraction):
        return f"{level.numerator}:{level.denominator}"
    return repr(level)


def _level_parse(text: str) -> Level:
    if ":" in text:
        num, den = text.split(":")
        return Fraction(int(num), int(den))
    try:
        return Dyadic.parse(text)
    except ParseError:
        return float(text)


def indicator(*intervals) -> PiecewiseWitness:
    """Characteristic function of a finite union of dyadic intervals."""
    blocks = []
    for iv in intervals:
        if not isinstance(iv, DyadicInterval):
            iv = DyadicInterval(*iv)
        blocks.append((iv, Dyadic(1)))
    blocks.sort(key=lambda b: b[0].lo.as_fraction())
    return PiecewiseWitness(blocks)


def merge_blocks(blocks) -> list:
    """Merge adjacent blocks with equal levels; keeps everything exact."""
    out: list[tuple[DyadicInterval, Level]] = []
    for iv, level in blocks:
        if out:
            piv, plevel = out[-1]
            if piv.hi == iv.lo and _levels_equal(plevel, level):
                out[-1] = (DyadicInterval(piv.lo, iv.hi), plevel)
                continue
        out.append((iv, level))
    return out


def _levels_equal(a: Level, b: Level) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        return a == b if isinstance(a, type(b)) else False
    fa = a.as_fraction() if isinstance(a, Dyadic) else a
    fb = b.as_fraction() if isinstance(b, Dyadic) else b
    return fa == fb


# ----------------------------------------------------------------------
# translated-sum evaluation

@dataclass
class PartialSum:
    value: Level
    terms: int
    exact: bool


def eval_witness(f: PiecewiseWitness, x) -> Level:
    return f.value(x)


def partial_sum(
    f: PiecewiseWitness, lam: LambdaSet, weights: WeightSeq, x, lam_max
) -> PartialSum:
    """sum of c_n * f(x + lambda_n) over the points lambda_n <= lam_max.

    Exact (Dyadic, upgraded to Fraction when a level demands it) whenever
    every input is exact; binary64 with the documented per-term budget when
    the set contributes float points.
    """
    lam_max = Dyadic.coerce(lam_max)
    lo = _lower_bound(lam)
    ones = isinstance(weights, OnesWeights)
    total: Level = Dyadic(0)
    terms = 0
    exact = True
    if ones and not isinstance(x, float):
        iterator = ((None, pt) for pt in lam.iter_points(lo, lam_max, closed_hi=True))
    else:
        iterator = lam.iter_indexed(lo, lam_max, closed_hi=True)
    for rank, pt in iterator:
        terms += 1
        if isinstance(pt, float):
            # float points force the binary64 path with its per-term budget
            exact = False
            fv = _level_float(f.value(float(x) + pt))
            if fv == 0.0:
                continue
            if not ones:
                fv *= weights.weight(rank + 1).as_float()
            total = _add_level(_level_float(total), fv)
            continue
        xv = Dyadic.coerce(x) + pt
        v = f.value(xv)
        if isinstance(v, Dyadic) and v.mantissa == 0:
            continue
        if not ones:
            v = _mul_level(weights.weight(rank + 1), v)
        total = _add_level(total, v)
    if isinstance(total, float):
        exact = False
    return PartialSum(total, terms, exact)


def _lower_bound(lam: LambdaSet) -> Dyadic:
    return lam.lower_bound()


def _mul_level(w: Dyadic, v: Level) -> Level:
    if isinstance(v, Dyadic):
        return w * v
    if isinstance(v, Fraction):
        return w.as_fraction() * v
    return w.as_float() * v


def _add_level(acc: Level, v: Level) -> Level:
    if isinstance(acc, float) or isinstance(v, float):
        return _level_float(acc) + _level_float(v)
    if isinstance(acc, Fraction) or isinstance(v, Fraction):
        fa = acc.as_fraction() if isinstance(acc, Dyadic) else acc
        fv = v.as_fraction() if isinstance(v, Dyadic) else v
        return fa + fv
    return acc + v


def _level_float(v: Level) -> float:
    return v.as_float() if isinstance(v, Dyadic) else float(v)


# ----------------------------------------------------------------------
# trajectory classification

CONVERGENT = "convergent"
DIVERGENT = "divergent"
UNDECIDED = "undecided"


@dataclass
class SumTrajectory:
    x: object
    horizons: list
    partials: list
    label: str
    exact: bool


def classify_trajectory(
    f: PiecewiseWitness,
    lam: LambdaSet,
    weights: WeightSeq,
    x,
    horizons,
    divergence_slope: float = 0.5,
    divergence_floor: float = 10.0,
    convergence_eps=None,
) -> SumTrajectory:
    """Advisory convergent/divergent label from partial sums at horizons.

    Convergent: every increment over the last half of the horizons is at
    most convergence_eps (default 0 for exact runs, 2^-40 for float runs).
    Divergent: the last ten horizons still add at least divergence_slope
    times what the first ten added, and the final partial clears
    divergence_floor.  Anything else is undecided.
    """
    horizons = [Dyadic.coerce(h) for h in horizons]
    for a, b in zip(horizons, horizons[1:]):
        if not a < b:
            raise ValueError("horizons must be strictly increasing")
    partials = []
    prev = None
    for h in horizons:
        ps = partial_sum(f, lam, weights, x, h)
        if prev is not None:
            _require_monotone(prev, ps.value)
        partials.append(ps.value)
        prev = ps.value
    exact = all(not isinstance(p, float) for p in partials)
    if convergence_eps is None:
        convergence_eps = Fraction(0) if exact else 2.0 ** -40
    n = len(partials)
    half = n // 2
    incs = [_diff(partials[i], partials[i - 1]) for i in range(1, n)]
    tail_incs = incs[half - 1 :] if n >= 2 else []
    if tail_incs and all(_le_eps(inc, convergence_eps) for inc in tail_incs):
        label = CONVERGENT
    else:
        d = min(10, max(1, n - 1))
        first_inc = _diff(partials[d - 1], partials[0]) if n >= 2 else None
        last_inc = _diff(partials[-1], partials[-1 - d]) if n >= 2 else None
        if (
            n >= 2
            and _level_float(last_inc) >= divergence_slope * _level_float(first_inc)
            and _level_float(partials[-1]) > divergence_floor
        ):
            label = DIVERGENT
        else:
            label = UNDECIDED
    return SumTrajectory(x, horizons, partials, label, exact)


def _require_monotone(a: Level, b: Level) -> None:
    if _level_float(b) < _level_float(a) - 1e-12:
        raise AssertionError("partial sums decreased; terms must be nonnegative")


def _diff(b: Level, a: Level) -> Level:
    if isinstance(a, float) or isinstance(b, float):
        return _level_float(b) - _level_float(a)
    fa = a.as_fraction() if isinstance(a, Dyadic) else a
    fb = b.as_fraction() if isinstance(b, Dyadic) else b
    return fb - fa


def _le_eps(inc: Level, eps) -> bool:
    if isinstance(inc, float) or isinstance(eps, float):
        return _level_float(inc) <= float(eps)
    return inc <= eps


# ----------------------------------------------------------------------
# regularisation pipeline: floor, clip, quantize, simplify

def _pow2_frac(e: int) -> Fraction:
    return Fraction(1 << e) if e >= 0 else Fraction(1, 1 << -e)


def _pow2_at_most(bound: Fraction) -> Dyadic:
    """Largest power of two <= bound, for bound > 0."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    e = bound.numerator.bit_length() - bound.denominator.bit_length()
    if _pow2_frac(e) > bound:
        e -= 1
    elif _pow2_frac(e + 1) <= bound:
        e += 1
    return Dyadic.pow2(e)


def unit_cells(window: DyadicInterval):
    """The unit intervals [k-1, k) covering the window, with the leftmost
    one truncated at window.lo; yields (k, interval)."""
    lo = window.lo
    hi = window.hi
    k = lo.floor_int() + 1  # cell index with [k-1, k) containing lo
    k = max(k, 1)  # indices below 1 all belong to the truncated first cell
    first = True
    while True:
        cell_lo = lo if first else Dyadic(k - 1)
        cell_hi = Dyadic(k)
        if cell_hi >= hi:
            if cell_lo < hi:
                yield k, DyadicInterval(cell_lo, hi)
            return
        yield k, DyadicInterval(cell_lo, cell_hi)
        first = False
        k += 1


def add_positive_floor(
    f: PiecewiseWitness, lam: LambdaSet, reach: int, window: DyadicInterval
) -> PiecewiseWitness:
    """Raise f by a per-cell constant so it is strictly positive on the
    window while adding less than total mass 1 to any translated sum from
    [-reach, reach].

    The cell constant is the largest power of two at most
    2^-k / #(points within reach of cell k), so the added contribution to
    any x in [-reach, reach] is below sum_k 2^-k = 1.
    """
    additions = []
    for k, cell in unit_cells(window):
        span = cell.length + Dyadic(2 * reach)
        cnt = count_in(lam, cell.lo - Dyadic(reach), span)
        eps = _pow2_at_most(Fraction(1, 1 << k) / max(1, cnt))
        additions.append((cell, eps))
    return _overlay_add(f, additions, window)


def _overlay_add(
    f: PiecewiseWitness, additions, window: DyadicInterval
) -> PiecewiseWitness:
    """Pointwise f + step(additions) inside the window; f passes through
    unchanged outside it."""
    cuts = {window.lo, window.hi}
    for iv, _ in additions:
        cuts.add(iv.lo)
        cuts.add(iv.hi)
    f_blocks = list(f.blocks_through(window.hi))
    for iv, _ in f_blocks:
        for edge in (iv.lo, iv.hi):
            if window.lo <= edge and edge <= window.hi:
                cuts.add(edge)
    edges = sorted(cuts, key=lambda d: d.as_fraction())
    out = []
    for iv, level in f_blocks:
        if iv.hi <= window.lo:
            out.append((iv, level))
        elif iv.lo < window.lo:
            out.append((DyadicInterval(iv.lo, window.lo), level))
    for a, b in zip(edges, edges[1:]):
        seg = DyadicInterval(a, b)
        base = f.value(a)
        add = Dyadic(0)
        for iv, eps in additions:
            if iv.lo <= a and a < iv.hi:
                add = eps
                break
        level = _add_level(base, add)
        if _level_positive(level):
            out.append((seg, level))
    for iv, level in f_blocks:
        if iv.lo >= window.hi:
            out.append((iv, level))
        elif iv.hi > window.hi:
            out.append((DyadicInterval(window.hi, iv.hi), level))
    return PiecewiseWitness(merge_blocks(out))


def clip_at_one(f: PiecewiseWitness) -> PiecewiseWitness:
    """Pointwise min(f, 1); block structure is preserved."""
    def clip(level: Level) -> Level:
        if isinstance(level, Dyadic):
            return level if level <= Dyadic(1) else Dyadic(1)
        if isinstance(level, Fraction):
            return level if level <= 1 else Dyadic(1)
        return min(level, 1.0)

    return f.map_levels(clip)


def quantize_level(level: Dyadic) -> Dyadic:
    """The power of two 2^-k with 2^-k < level <= 2^-(k-1).

    Levels that are exact powers of two drop one step, honouring the strict
    lower inequality.
    """
    if not Dyadic(0) < level or level > Dyadic(1):
        raise ValueError(f"level {level} outside (0, 1]")
    if level.is_pow2():
        return level.shift(-1)
    return Dyadic.pow2(level.mantissa.bit_length() - 1 - level.exponent)


def quantize_to_powers(
    f: PiecewiseWitness, ones_below_zero_from=None
) -> PiecewiseWitness:
    """Snap every level to the power of two strictly below it.

    With ones_below_zero_from set (a Dyadic left edge), the result is
    overridden to the constant 1 on [that edge, 0), the normalisation some
    downstream constructions assume; the default leaves the sandwich
    (1/2) f <= result < f intact everywhere.
    """
    blocks = []
    for iv, level in f.known_blocks():
        if not isinstance(level, Dyadic):
            raise ValueError("quantization needs exact dyadic levels")
        blocks.append((iv, quantize_level(level)))
    if ones_below_zero_from is not None:
        left = Dyadic.coerce(ones_below_zero_from)
        zero = Dyadic(0)
        if not left < zero:
            raise ValueError("normalisation edge must be negative")
        out = []
        for iv, level in blocks:
            if iv.hi <= left:
                out.append((iv, level))
            elif iv.lo < left:
                out.append((DyadicInterval(iv.lo, left), level))
        out.append((DyadicInterval(left, zero), Dyadic(1)))
        for iv, level in blocks:
            if iv.lo >= zero:
                out.append((iv, level))
            elif iv.hi > zero:
                out.append((DyadicInterval(zero, iv.hi), level))
        blocks = out
    return PiecewiseWitness(merge_blocks(blocks))


@dataclass
class SimplifyReport:
    witness: PiecewiseWitness
    deltas: list  # (cell index k, delta_k)
    changed_measure: Fraction


def simplify_to_intervals(
    f: PiecewiseWitness,
    lam: LambdaSet,
    reach: int,
    window: DyadicInterval,
    delta_rule=None,
) -> SimplifyReport:
    """Replace per-level sets by finite unions of [x, y) intervals.

    Step witnesses here are already in that form, so the witness comes back
    with adjacent equal levels merged and the change budget 2*delta_k per
    cell untouched; the report still records the delta schedule so the
    modification-series criterion can be checked downstream.
    """
    if delta_rule is None:
        def delta_rule(k: int) -> Fraction:
            cnt = count_in(lam, Dyadic(k), Dyadic(2))
            return Fraction(1, 1 << k) / max(1, cnt)

    deltas = [(k, delta_rule(k)) for k, _ in unit_cells(window)]
    merged = PiecewiseWitness(merge_blocks(f.known_blocks()))
    return SimplifyReport(merged, deltas, Fraction(0))


# ----------------------------------------------------------------------
# modification-series criterion

SUMMABLE = "summable"
UNKNOWN = "unknown"


@dataclass
class ModificationReport:
    terms: list[Fraction]
    partials: list[Fraction]
    verdict: str
    ratio_max: Optional[Fraction]
    tail_is_zero: bool


def modification_series_check(
    lam: LambdaSet,
    eps_schedule,
    reach: int,
    l_max: int,
    ratio_threshold: Fraction = Fraction(3, 4),
) -> ModificationReport:
    """Exact partial sums of sum_l eps(l - reach) * #(set in [l, l+1)).

    Verdict is "summable" when the tail is provably zero (the window covers
    the whole finite set) or when the nonzero terms of the last half
    contract by at least ratio_threshold step over step, in which case a
    geometric tail bound applies if the pattern persists; otherwise
    "unknown".
    """
    if l_max < 1:
        raise ValueError("l_max must be >= 1")
    terms = []
    prev_eps = None
    for l in range(0, l_max + 1):
        eps = Fraction(eps_schedule(l - reach))
        if eps <= 0:
            raise ValueError("eps must be positive")
        if prev_eps is not None and eps > prev_eps:
            raise ValueError("eps must be decreasing")
        prev_eps = eps
        terms.append(eps * count_in(lam, Dyadic(l), Dyadic(1)))
    partials = []
    total = Fraction(0)
    for t in terms:
        total += t
        partials.append(total)
    tail_is_zero = lam.total_count() == lam.count_below(Dyadic(l_max + 1))
    ratio_max = None
    half = len(terms) // 2
    ratios = [
        terms[i + 1] / terms[i]
        for i in range(half, len(terms) - 1)
        if terms[i] > 0
    ]
    if ratios:
        ratio_max = max(ratios)
    if tail_is_zero:
        verdict = SUMMABLE
    elif ratio_max is not None and ratio_max <= ratio_threshold and all(
        t > 0 for t in terms[half:]
    ):
        verdict = SUMMABLE
    else:
        verdict = UNKNOWN
    return ModificationReport(terms, partials, verdict, ratio_max, tail_is_zero)
