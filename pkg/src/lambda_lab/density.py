"""Exact dyadic translate-counts over subsets of [0, 1).

For a finite union C of dyadic intervals and a grid x + 2^n Z (n <= 0), the
scaled count #(grid in C) * 2^n equals the measure of C exactly as soon as
the grid spacing divides every cell of C, i.e. once -n reaches the set's
resolution.  That finite exactness statement is the desk-scale analogue of
the almost-everywhere density limit it mirrors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .dyadic import Dyadic, DyadicInterval
from .errors import ParseError


class DyadicSet:
    """Finite union of disjoint sorted dyadic intervals inside [0, 1)."""

    def __init__(self, intervals):
        ivs = []
        for iv in intervals:
            if not isinstance(iv, DyadicInterval):
                iv = DyadicInterval(*iv)
            ivs.append(iv)
        ivs.sort(key=lambda i: i.lo.as_fraction())
        for a, b in zip(ivs, ivs[1:]):
            if not a.hi <= b.lo:
                raise ValueError("intervals must be disjoint")
        if ivs:
            if ivs[0].lo < Dyadic(0) or Dyadic(1) < ivs[-1].hi:
                raise ValueError("intervals must lie inside [0, 1)")
        self.intervals = tuple(ivs)

    @property
    def measure(self) -> Dyadic:
        total = Dyadic(0)
        for iv in self.intervals:
            total = total + iv.length
        return total

    @property
    def resolution(self) -> int:
        """Largest endpoint exponent; grids at least this fine are exact."""
        res = 0
        for iv in self.intervals:
            res = max(res, iv.lo.exponent, iv.hi.exponent)
        return res

    def contains(self, x: Dyadic) -> bool:
        for iv in self.intervals:
            if iv.contains(x):
                return True
        return False

    def to_json_list(self) -> list:
        return [[str(iv.lo), str(iv.hi)] for iv in self.intervals]

    def to_json(self) -> str:
        return json.dumps(self.to_json_list())

    @classmethod
    def from_json_list(cls, data) -> "DyadicSet":
        try:
            return cls(
                [DyadicInterval(Dyadic.parse(lo), Dyadic.parse(hi)) for lo, hi in data]
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad dyadic-set JSON: {data!r}") from exc

    def __repr__(self):
        return f"<DyadicSet {self.to_json_list()}>"


@dataclass
class TranslateCount:
    count: int
    scaled: Dyadic  # count * 2^n, the one-period average


def translate_count(c: DyadicSet, x, n: int) -> TranslateCount:
    """Count of (x + 2^n Z) inside C over one period of [0, 1), exact.

    n must be <= 0; the grid has exactly 2^-n points in [0, 1) and the count
    is accumulated per interval in closed form.
    """
    if n > 0:
        raise ValueError("n must be <= 0")
    x = Dyadic.coerce(x)
    if x < Dyadic(0) or not x < Dyadic(1):
        raise ValueError("x must lie in [0, 1)")
    spacing_exp = -n  # grid spacing 2^n = 2^-spacing_exp
    # offset of the grid inside [0, 2^n)
    x0_scaled = x.shift(spacing_exp)  # x / 2^n
    frac_idx = x0_scaled - Dyadic(x0_scaled.floor_int())
    count = 0
    for iv in c.intervals:
        lo_idx = (iv.lo.shift(spacing_exp) - frac_idx).ceil_int()
        hi_idx = (iv.hi.shift(spacing_exp) - frac_idx).ceil_int()
        count += hi_idx - lo_idx
    return TranslateCount(count, Dyadic(count, spacing_exp))


@dataclass
class DensityProfileRow:
    n: int
    count: int
    scaled: Dyadic
    guaranteed_exact: bool  # -n >= resolution
    matches_measure: bool  # scaled == measure, observed


@dataclass
class DensityProfile:
    rows: list[DensityProfileRow]
    measure: Dyadic
    first_guaranteed_level: int  # the n with -n == resolution


def density_profile(c: DyadicSet, x, n_range) -> DensityProfile:
    """Scaled translate-counts along decreasing n with exactness flags."""
    n_list = list(n_range)
    for a, b in zip(n_list, n_list[1:]):
        if b >= a:
            raise ValueError("n_range must be strictly decreasing")
    mu = c.measure
    res = c.resolution
    rows = []
    for n in n_list:
        tc = translate_count(c, x, n)
        rows.append(
            DensityProfileRow(
                n=n,
                count=tc.count,
                scaled=tc.scaled,
                guaranteed_exact=(-n >= res),
                matches_measure=(tc.scaled == mu),
            )
        )
    return DensityProfile(rows, mu, -res)
