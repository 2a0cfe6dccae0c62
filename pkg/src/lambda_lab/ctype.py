"""Weighted translated-sum constructions and their exact claim checks.

Given a point set and a fast-decaying weight sequence, the construction
places unit-length support blocks at positions y_1 < y_2 < ... with gaps
above one, collects the ranks T_n of the points inside [y_n, y_n + 1/2],
and sets the block level d_n to the reciprocal of the T_n weight sum.

The two claim checks are exact but never materialise astronomically long
sums.  On the divergence side, T_n inside the translated support window is
an endpoint comparison, and it forces the block contribution d_n * (weighted
hits) to be at least d_n * sum(T_n weights) = 1.  On the convergence side,
every rank hitting the window exceeds max T_n, so the block contribution is
below d_n * tail(max T_n), and the fast-decay inequality caps that by 2^-n;
summing the caps keeps every partial sum below one.  Each inequality in the
chain is checked exactly on small integers and exponent-scaled rationals.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .dyadic import Dyadic, DyadicInterval, ceil_to_grid
from .errors import (
    ClaimVerificationError,
    DyadicOverflowError,
    GeneratorExhaustedError,
    InsufficientLambdaError,
)
from .sets import LambdaSet
from .weights import (
    Exp2Rational,
    GeometricWeights,
    OnesWeights,
    SuperExpWeights,
    WeightSeq,
)
from .witness import PiecewiseWitness

HALF = Dyadic(1, 1)


# ----------------------------------------------------------------------
# summable-weights triviality check

@dataclass
class SummableReport:
    verdict: str  # "everywhere-convergent" or "inconclusive"
    bound: Optional[Fraction]


def summable_weights_check(weights: WeightSeq, f_bound) -> SummableReport:
    """With a summable weight tail, any witness bounded by f_bound keeps
    every translated sum at or below f_bound * sum of weights."""
    f_bound = Dyadic.coerce(f_bound)
    if f_bound < Dyadic(0):
        raise ValueError("f_bound must be nonnegative")
    tail = weights.tail_bound(0)
    if tail is None:
        return SummableReport("inconclusive", None)
    if f_bound.mantissa == 0:
        return SummableReport("everywhere-convergent", Fraction(0))
    bound = f_bound.as_fraction() * tail.as_fraction()
    return SummableReport("everywhere-convergent", bound)


# ----------------------------------------------------------------------
# fast-decay condition

@dataclass
class FastDecayRow:
    n: int
    holds: bool
    tail_over_weight_log2: Optional[float]


@dataclass
class FastDecayReport:
    rows: list[FastDecayRow]
    holds_through: int
    first_fail: Optional[int]

    @property
    def holds(self) -> bool:
        return self.first_fail is None


def check_fast_decay(weights: WeightSeq, n_max: int) -> FastDecayReport:
    """Exact per-n test of tail(n) < 2^-n * c_n via the symbolic ratio."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    rows = []
    first_fail = None
    for n in range(1, n_max + 1):
        ratio = weights.tail_over_weight(n)
        holds = ratio is not None and ratio < Exp2Rational.pow2(-n)
        rows.append(
            FastDecayRow(n, holds, None if ratio is None else ratio.log2())
        )
        if not holds and first_fail is None:
            first_fail = n
    holds_through = (first_fail - 1) if first_fail is not None else n_max
    return FastDecayReport(rows, holds_through, first_fail)


# ----------------------------------------------------------------------
# the construction

@dataclass
class ConstructionBlock:
    index: int  # 1-based block number n
    y: Dyadic
    t_lo: int  # 1-based rank of the first point in [y, y + 1/2]
    t_hi: int  # 1-based rank of the last
    weight_sum: Optional[Exp2Rational]  # exact sum over T_n when affordable
    d_exact: Optional[Fraction]  # exact level 1 / weight_sum when affordable
    d_log2: float


@dataclass
class WeightedConstruction:
    lam: LambdaSet
    weights: WeightSeq
    grid_exp: int
    blocks: list[ConstructionBlock] = field(default_factory=list)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def support_interval(self, n: int) -> tuple[Dyadic, Dyadic]:
        """Closed support [y_n, y_n + 1] of block n (1-based)."""
        y = self.blocks[n - 1].y
        return y, y + Dyadic(1)

    def witness(self) -> PiecewiseWitness:
        """Generator-backed step witness with one block per construction
        block; the closed right endpoint is realised by stretching each
        half-open block one grid ulp past y_n + 1.

        Queries beyond the last built block raise GeneratorExhaustedError
        rather than pretending the function vanishes there.
        """
        ulp = Dyadic.pow2(-(self.grid_exp + 4))

        def gen():
            for blk in self.blocks:
                if blk.d_exact is not None:
                    level = blk.d_exact
                else:
                    level = 2.0 ** blk.d_log2
                    if not math.isfinite(level) or level <= 0:
                        raise DyadicOverflowError(
                            f"block {blk.index} level is not materialisable"
                        )
                yield (
                    DyadicInterval(blk.y, blk.y + Dyadic(1) + ulp),
                    level,
                )
            raise GeneratorExhaustedError(
                f"construction built through block {self.n_blocks} only"
            )

        return PiecewiseWitness(generator=gen())

    def to_json_dict(self) -> dict:
        out = {
            "set": self.lam.to_descriptor(),
            "weights": self.weights.to_descriptor(),
            "grid_exp": self.grid_exp,
            "blocks": [],
        }
        for blk in self.blocks:
            d: dict = {"log2": blk.d_log2}
            if blk.d_exact is not None:
                d = {"num": str(blk.d_exact.numerator), "den": str(blk.d_exact.denominator)}
            out["blocks"].append(
                {
                    "n": blk.index,
                    "y": str(blk.y),
                    "t_lo": blk.t_lo,
                    "t_hi": blk.t_hi,
                    "d": d,
                }
            )
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def build_construction(
    lam: LambdaSet,
    weights: WeightSeq,
    n_blocks: int,
    grid_exp: int = 4,
    sum_bit_budget: int = 1 << 20,
    require_fast_decay: bool = True,
) -> WeightedConstruction:
    """Greedy deterministic construction on the 2^-grid_exp grid.

    y_1 is the smallest grid point whose closed half-unit window meets the
    set; later anchors are the smallest grid points at least
    y_{n-1} + 1 + 2^-grid_exp whose window meets the set.  The scan jumps
    straight to the next point's reach, so sparse sets cost no more than
    dense ones, and the result equals the naive grid walk exactly.
    """
    if n_blocks < 1:
        raise ValueError("n_blocks must be >= 1")
    if grid_exp < 1:
        raise ValueError("grid_exp must be >= 1 (grid spacing at most 1/2)")
    if require_fast_decay:
        fd = check_fast_decay(weights, n_blocks)
        if not fd.holds:
            raise ValueError(
                f"weight rule fails the fast-decay condition at n={fd.first_fail}"
            )
    total = lam.total_count()
    con = WeightedConstruction(lam, weights, grid_exp)
    step = Dyadic.pow2(-grid_exp)
    prev_y = None
    prev_t_hi = 0
    for n in range(1, n_blocks + 1):
        if prev_y is None:
            if total == 0:
                raise InsufficientLambdaError("empty point set")
            candidate = ceil_to_grid(lam.first_point() - HALF, grid_exp)
        else:
            candidate = prev_y + Dyadic(1) + step
        while True:
            r0 = lam.count_below(candidate)
            if r0 >= total:
                raise InsufficientLambdaError(
                    f"set exhausted scanning for block {n} of {n_blocks}"
                )
            nxt = lam.point_at(r0)
            if not isinstance(nxt, Dyadic):
                raise ValueError("construction needs an exact dyadic point set")
            if nxt <= candidate + HALF:
                break
            candidate = ceil_to_grid(nxt - HALF, grid_exp)
        y = candidate
        t_lo0 = lam.count_below(y)
        t_hi0 = lam.count_upto(y + HALF) - 1
        if t_hi0 < t_lo0:
            raise AssertionError("scan invariant broken: empty window")
        t_lo, t_hi = t_lo0 + 1, t_hi0 + 1
        if t_lo <= prev_t_hi:
            raise AssertionError("rank ranges must increase across blocks")
        if t_hi < n:
            raise AssertionError("rank bookkeeping broken: max rank below n")
        weight_sum = weights.block_sum(t_lo, t_hi, sum_bit_budget)
        d_exact = None
        d_log2 = None
        if weight_sum is not None:
            d_log2 = -weight_sum.log2()
            try:
                d_exact = weight_sum.reciprocal().as_fraction(sum_bit_budget)
            except DyadicOverflowError:
                d_exact = None
        else:
            d_log2 = -_approx_block_sum_log2(weights, t_lo, t_hi)
        con.blocks.append(
            ConstructionBlock(n, y, t_lo, t_hi, weight_sum, d_exact, d_log2)
        )
        prev_y = y
        prev_t_hi = t_hi
    return con


def _approx_block_sum_log2(weights: WeightSeq, j_lo: int, j_hi: int) -> float:
    """log2 of the block weight sum, first-terms approximation; used only
    for reporting mirrors when the exact sum is over budget."""
    lead = weights.weight_log2(j_lo)
    acc = 0.0
    for j in range(j_lo, min(j_lo + 64, j_hi) + 1):
        acc += 2.0 ** (weights.weight_log2(j) - lead)
    return lead + math.log2(acc)


# ----------------------------------------------------------------------
# claim verification

@dataclass
class ClaimRow:
    x: Dyadic
    n: int
    contribution: float  # exact value when kind == "exact", else a bound
    bound: float
    ok: bool
    kind: str  # "exact", "lower-bound", "upper-bound", "empty"


@dataclass
class ClaimReport:
    side: str
    rows: list[ClaimRow]
    ok: bool


def verify_claim_divergence(
    con: WeightedConstruction,
    x_grid: Sequence,
    n_max: Optional[int] = None,
    raise_on_failure: bool = True,
) -> ClaimReport:
    """For x in [0, 1/2]: every built block contributes at least one to the
    weighted sum, so the partial sum through block n is at least n.

    Certified exactly: all of T_n translates into the closed support
    [y_n, y_n + 1], hence the weighted hits dominate the T_n weight sum
    whose product with d_n is one by construction.
    """
    n_max = con.n_blocks if n_max is None else n_max
    rows = []
    ok_all = True
    for x in x_grid:
        x = Dyadic.coerce(x)
        if x < Dyadic(0) or HALF < x:
            raise ValueError(f"divergence grid point {x} outside [0, 1/2]")
        for n in range(1, n_max + 1):
            blk = con.blocks[n - 1]
            lo, hi = con.support_interval(n)
            lam_lo = con.lam.point_at(blk.t_lo - 1)
            lam_hi = con.lam.point_at(blk.t_hi - 1)
            ok = (lo <= x + lam_lo) and (x + lam_hi <= hi)
            ratio, kind = _exact_contribution(con, x, n)
            if kind == "exact":
                ok = ok and ratio >= Exp2Rational(Fraction(1))
                contribution = float(ratio)
            elif kind == "empty":
                ok = False
                contribution = 0.0
            else:
                contribution, kind = 1.0, "lower-bound"
            rows.append(ClaimRow(x, n, contribution, 1.0, ok, kind))
            if not ok:
                ok_all = False
                if raise_on_failure:
                    raise ClaimVerificationError(
                        f"divergence claim failed at x={x}, block {n}", x=x, n=n
                    )
    return ClaimReport("divergence", rows, ok_all)


def verify_claim_convergence(
    con: WeightedConstruction,
    x_grid: Sequence,
    n_max: Optional[int] = None,
    raise_on_failure: bool = True,
) -> ClaimReport:
    """For x < -1/2: each block contributes strictly less than 2^-n, so
    every partial sum stays below one.

    Certified exactly by the chain: every rank reaching the translated
    support exceeds max T_n =: m; the weighted hits are at most tail(m);
    tail(m) < 2^-m c_m <= 2^-n c_m (fast decay at m, and m >= n); and c_m
    is one term of the T_n sum, so the contribution is under
    2^-n * d_n * sum(T_n weights) = 2^-n.
    """
    n_max = con.n_blocks if n_max is None else n_max
    rows = []
    ok_all = True
    weights = con.weights
    for x in x_grid:
        x = Dyadic.coerce(x)
        if not x < -HALF:
            raise ValueError(f"convergence grid point {x} not below -1/2")
        for n in range(1, n_max + 1):
            blk = con.blocks[n - 1]
            lo, hi = con.support_interval(n)
            r_lo0 = con.lam.count_below(lo - x)
            r_hi0 = con.lam.count_upto(hi - x) - 1
            bound = 2.0 ** (-n)
            if r_hi0 < r_lo0:
                rows.append(ClaimRow(x, n, 0.0, bound, True, "empty"))
                continue
            m = blk.t_hi
            ok = (r_lo0 + 1) > m and m >= n
            if ok:
                tail_ratio = weights.tail_over_weight(m)
                ok = tail_ratio is not None and tail_ratio < Exp2Rational.pow2(-n)
            ratio, kind = _exact_contribution(con, x, n)
            if kind == "exact":
                ok = ok and ratio < Exp2Rational.pow2(-n)
                contribution = float(ratio)
            else:
                # report the certified cap instead of the unmaterialisable value
                contribution, kind = bound, "upper-bound"
            rows.append(ClaimRow(x, n, contribution, bound, ok, kind))
            if not ok:
                ok_all = False
                if raise_on_failure:
                    raise ClaimVerificationError(
                        f"convergence claim failed at x={x}, block {n}", x=x, n=n
                    )
    return ClaimReport("convergence", rows, ok_all)


def _exact_contribution(con: WeightedConstruction, x: Dyadic, n: int):
    """d_n * (weighted hits of block n at x) as an exact Exp2Rational when
    both sums are affordable; kind is "exact", "empty" or None."""
    blk = con.blocks[n - 1]
    if blk.weight_sum is None:
        return None, None
    lo, hi = con.support_interval(n)
    r_lo0 = con.lam.count_below(lo - x)
    r_hi0 = con.lam.count_upto(hi - x) - 1
    if r_hi0 < r_lo0:
        return None, "empty"
    hit_sum = con.weights.block_sum(r_lo0 + 1, r_hi0 + 1)
    if hit_sum is None:
        return None, None
    return hit_sum / blk.weight_sum, "exact"


# ----------------------------------------------------------------------
# weight-compensating rescale of a characteristic witness

@dataclass
class TransferResult:
    witness: PiecewiseWitness
    alphas: list  # (interval, alpha, relevant rank range or None)


def rescale_for_weights(
    f: PiecewiseWitness, lam: LambdaSet, weights: WeightSeq, d_window: DyadicInterval
) -> TransferResult:
    """Scale each support interval of a {0,1} witness so that weighted hits
    from the window dominate the unweighted ones.

    Per interval, the scale is the smallest power of two alpha with
    alpha * min(relevant weights) >= 1, the relevant ranks being every point
    that can translate some window x into the interval; an interval no point
    can reach keeps alpha = 1.
    """
    blocks = []
    alphas = []
    for iv, level in f.known_blocks():
        if not (isinstance(level, Dyadic) and level == Dyadic(1)):
            raise ValueError("transfer needs a characteristic (0/1) witness")
        reach_lo = iv.lo - d_window.hi
        reach_hi = iv.hi - d_window.lo
        r_lo0 = lam.count_below(reach_lo)
        r_hi0 = lam.count_upto(reach_hi) - 1
        if r_hi0 < r_lo0:
            alpha = Dyadic(1)
            alphas.append((iv, alpha, None))
        else:
            min_w = _min_weight(weights, r_lo0 + 1, r_hi0 + 1)
            alpha = _pow2_at_least_reciprocal(min_w)
            alphas.append((iv, alpha, (r_lo0 + 1, r_hi0 + 1)))
        blocks.append((iv, alpha))
    return TransferResult(PiecewiseWitness(blocks), alphas)


def _min_weight(weights: WeightSeq, j_lo: int, j_hi: int) -> Dyadic:
    if isinstance(weights, OnesWeights):
        return Dyadic(1)
    if isinstance(weights, (GeometricWeights, SuperExpWeights)):
        return weights.weight(j_hi)  # strictly decreasing rules
    return min(
        (weights.weight(j) for j in range(j_lo, j_hi + 1)),
        key=lambda d: d.as_fraction(),
    )


def _pow2_at_least_reciprocal(w: Dyadic) -> Dyadic:
    """Smallest power of two alpha with alpha * w >= 1, for w > 0."""
    if not Dyadic(0) < w:
        raise ValueError("weight must be positive")
    m, e = w.mantissa, w.exponent
    t = e - (m.bit_length() - 1)
    if m & (m - 1):  # not a power of two: need one more doubling
        t += 1
    return Dyadic.pow2(max(t, 0))


def verify_transfer_domination(
    f: PiecewiseWitness,
    result: TransferResult,
    lam: LambdaSet,
    weights: WeightSeq,
    d_grid: Sequence,
) -> bool:
    """Exact blockwise check: weighted sums of the rescaled witness dominate
    the unweighted sums of the original at every grid point."""
    g = result.witness
    for x in d_grid:
        x = Dyadic.coerce(x)
        for iv, _ in f.known_blocks():
            lhs = Fraction(0)
            rhs = Fraction(0)
            for rank, pt in lam.iter_indexed(iv.lo - x, iv.hi - x):
                # x + pt is in [iv.lo, iv.hi) exactly for these ranks
                w = weights.weight(rank + 1).as_fraction()
                gval = g.value(x + pt)
                fval = f.value(x + pt)
                lhs += w * (gval.as_fraction() if isinstance(gval, Dyadic) else Fraction(gval))
                rhs += fval.as_fraction() if isinstance(fval, Dyadic) else Fraction(fval)
            if lhs < rhs:
                return False
    return True
