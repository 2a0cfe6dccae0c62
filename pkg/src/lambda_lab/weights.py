"""Positive weight sequences with exact tail-sum oracles.

Weights are exact dyadics; tail bounds are exact rationals carried as a
small fraction times a power of two (:class:`Exp2Rational`), so comparisons
stay cheap even when the exponent is in the trillions, as happens for
2^(-n^2) weights at lattice ranks in the millions.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional

from .dyadic import Dyadic
from .errors import DyadicOverflowError, ParseError


def _log2_int(n: int) -> float:
    bl = n.bit_length()
    if bl <= 60:
        return math.log2(n)
    return math.log2(n >> (bl - 60)) + (bl - 60)


class Exp2Rational:
    """Exact positive value fraction * 2^exp2 with a small fraction part.

    Comparisons first separate values by the position of the leading bit, so
    two values whose exponents differ by millions are ordered without ever
    materialising a shifted big integer.
    """

    __slots__ = ("fraction", "exp2")

    def __init__(self, fraction, exp2: int = 0):
        fraction = Fraction(fraction)
        if fraction <= 0:
            raise ValueError("Exp2Rational is for positive magnitudes")
        object.__setattr__(self, "fraction", fraction)
        object.__setattr__(self, "exp2", int(exp2))

    def __setattr__(self, name, value):
        raise AttributeError("Exp2Rational values are immutable")

    @classmethod
    def from_dyadic(cls, d: Dyadic) -> "Exp2Rational":
        if d.mantissa <= 0:
            raise ValueError("need a positive dyadic")
        return cls(Fraction(d.mantissa), -d.exponent)

    @classmethod
    def pow2(cls, k: int) -> "Exp2Rational":
        return cls(Fraction(1), k)

    def _cmp(self, other: "Exp2Rational") -> int:
        # self ? other  <=>  a * 2^d ? b  with small a, b
        a = self.fraction.numerator * other.fraction.denominator
        b = other.fraction.numerator * self.fraction.denominator
        d = self.exp2 - other.exp2
        la = a.bit_length() + d
        lb = b.bit_length()
        if la > lb:
            return 1
        if la < lb:
            return -1
        if d >= 0:
            a <<= d
        else:
            b <<= -d
        return (a > b) - (a < b)

    def __lt__(self, other):
        return self._cmp(_coerce_mag(other)) < 0

    def __le__(self, other):
        return self._cmp(_coerce_mag(other)) <= 0

    def __gt__(self, other):
        return self._cmp(_coerce_mag(other)) > 0

    def __ge__(self, other):
        return self._cmp(_coerce_mag(other)) >= 0

    def __eq__(self, other):
        try:
            return self._cmp(_coerce_mag(other)) == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self.as_fraction_unchecked()) if abs(self.exp2) < 4096 else hash(
            (self.fraction, self.exp2)
        )

    def __mul__(self, other):
        other = _coerce_mag(other)
        return Exp2Rational(self.fraction * other.fraction, self.exp2 + other.exp2)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce_mag(other)
        return Exp2Rational(self.fraction / other.fraction, self.exp2 - other.exp2)

    def add(self, other: "Exp2Rational", bit_budget: int = 1 << 21) -> "Exp2Rational":
        """Exact addition; refuses when alignment would exceed bit_budget."""
        other = _coerce_mag(other)
        lo = min(self.exp2, other.exp2)
        da, db = self.exp2 - lo, other.exp2 - lo
        if max(da, db) > bit_budget:
            raise DyadicOverflowError(
                f"exact addition needs {max(da, db)} alignment bits"
            )
        return Exp2Rational(
            self.fraction * (1 << da) + other.fraction * (1 << db), lo
        )

    def reciprocal(self) -> "Exp2Rational":
        return Exp2Rational(1 / self.fraction, -self.exp2)

    def as_fraction(self, bit_budget: int = 1 << 21) -> Fraction:
        if abs(self.exp2) > bit_budget:
            raise DyadicOverflowError(f"materialising 2^{self.exp2} refused")
        return self.as_fraction_unchecked()

    def as_fraction_unchecked(self) -> Fraction:
        if self.exp2 >= 0:
            return self.fraction * (1 << self.exp2)
        return self.fraction / (1 << (-self.exp2))

    def log2(self) -> float:
        return (
            _log2_int(self.fraction.numerator)
            - _log2_int(self.fraction.denominator)
            + self.exp2
        )

    def as_float(self) -> float:
        num, den = self.fraction.numerator, self.fraction.denominator
        if num.bit_length() < 500 and den.bit_length() < 500 and abs(self.exp2) < 900:
            return math.ldexp(num / den, self.exp2)
        l2 = self.log2()
        if l2 > 1024:
            return math.inf
        if l2 < -1100:
            return 0.0
        return 2.0 ** l2

    def __float__(self):
        return self.as_float()

    def __repr__(self):
        return f"Exp2Rational({self.fraction}, 2^{self.exp2})"


def _coerce_mag(value) -> Exp2Rational:
    if isinstance(value, Exp2Rational):
        return value
    if isinstance(value, Dyadic):
        return Exp2Rational.from_dyadic(value)
    if isinstance(value, (int, Fraction)):
        return Exp2Rational(Fraction(value))
    raise TypeError(f"cannot compare {value!r} with Exp2Rational")


# ----------------------------------------------------------------------
# weight rules

class WeightSeq:
    """A positive weight sequence c_1, c_2, ... with a tail-sum oracle."""

    label = "abstract"

    def weight(self, n: int) -> Dyadic:
        """Exact c_n (1-based); may overflow the dyadic mantissa."""
        raise NotImplementedError

    def weight_log2(self, n: int) -> float:
        raise NotImplementedError

    def tail_bound(self, n: int) -> Optional[Exp2Rational]:
        """A true upper bound for sum_{j>n} c_j, or None when infinite."""
        raise NotImplementedError

    def tail_over_weight(self, n: int) -> Optional[Exp2Rational]:
        """tail_bound(n) / c_n computed symbolically; None when unbounded.

        This is the quantity the fast-decay condition compares against 2^-n
        and it stays small even when c_n itself is astronomically scaled.
        """
        raise NotImplementedError

    def block_sum(self, j_lo: int, j_hi: int, bit_budget: int = 1 << 21) -> Optional[Exp2Rational]:
        """Exact sum over 1-based ranks j_lo..j_hi inclusive, or None when
        the exact representation would blow the bit budget."""
        raise NotImplementedError

    def is_summable_rule(self) -> bool:
        return self.tail_bound(0) is not None

    def to_descriptor(self) -> str:
        return self.label

    def __repr__(self):
        return f"<weights {self.to_descriptor()}>"


class OnesWeights(WeightSeq):
    label = "ones"

    def weight(self, n):
        _check_rank(n)
        return Dyadic(1)

    def weight_log2(self, n):
        return 0.0

    def tail_bound(self, n):
        return None

    def tail_over_weight(self, n):
        return None

    def block_sum(self, j_lo, j_hi, bit_budget=1 << 21):
        return Exp2Rational(Fraction(j_hi - j_lo + 1))


class GeometricWeights(WeightSeq):
    """c_n = r^n for a dyadic ratio r in (0, 1)."""

    def __init__(self, ratio):
        ratio = Dyadic.coerce(ratio)
        if not (Dyadic(0) < ratio and ratio < Dyadic(1)):
            raise ValueError(f"ratio {ratio} outside (0, 1)")
        self.ratio = ratio
        self._rf = ratio.as_fraction()

    @property
    def label(self):
        return f"geometric:{self.ratio}"

    def weight(self, n):
        _check_rank(n)
        return Dyadic(self.ratio.mantissa ** n, self.ratio.exponent * n)

    def weight_log2(self, n):
        return n * math.log2(self.ratio.as_float())

    def _weight_mag(self, n) -> Exp2Rational:
        return Exp2Rational(
            Fraction(self.ratio.mantissa ** n), -self.ratio.exponent * n
        )

    def tail_bound(self, n):
        # exact tail: r^(n+1) / (1 - r)
        _check_rank(n + 1)
        return self._weight_mag(n + 1) / Exp2Rational(1 - self._rf)

    def tail_over_weight(self, n):
        return Exp2Rational(self._rf / (1 - self._rf))

    def block_sum(self, j_lo, j_hi, bit_budget=1 << 21):
        _check_rank(j_lo)
        count = j_hi - j_lo + 1
        a_bits = max(1, self.ratio.mantissa.bit_length() - 1)
        if (j_hi + 1) * a_bits > bit_budget:
            return None
        total = self._rf ** j_lo * (1 - self._rf ** count) / (1 - self._rf)
        return Exp2Rational(total)


class SuperExpWeights(WeightSeq):
    """c_n = 2^(-n^2); the reference fast-decay sequence."""

    label = "superexp"

    def weight(self, n):
        _check_rank(n)
        return Dyadic._raw(1, n * n)

    def weight_log2(self, n):
        return float(-n * n)

    def tail_bound(self, n):
        # sum_{j>n} 2^(-j^2) <= 2^(-(n+1)^2) * sum_i 2^(-2(n+1)i)
        if n < 0:
            raise ValueError("n must be nonnegative")
        shift = 2 * (n + 1)
        head = Fraction(1 << shift, (1 << shift) - 1)
        return Exp2Rational(head, -(n + 1) * (n + 1))

    def tail_over_weight(self, n):
        _check_rank(n)
        shift = 2 * (n + 1)
        head = Fraction(1 << shift, (1 << shift) - 1)
        return Exp2Rational(head, -(2 * n + 1))

    def block_sum(self, j_lo, j_hi, bit_budget=1 << 21):
        _check_rank(j_lo)
        span = j_hi * j_hi - j_lo * j_lo
        if span > bit_budget:
            return None
        top = j_hi * j_hi
        num = 0
        for j in range(j_lo, j_hi + 1):
            num |= 1 << (top - j * j)  # distinct bit positions, OR is add
        return Exp2Rational(Fraction(num), -top)


class TableWeights(WeightSeq):
    """Finite explicit weights for desk experiments; ranks past the table
    are an error rather than an implicit zero."""

    def __init__(self, values):
        vals = [Dyadic.coerce(v) for v in values]
        if not vals or any(not Dyadic(0) < v for v in vals):
            raise ValueError("table weights must be positive and nonempty")
        self.values = tuple(vals)

    @property
    def label(self):
        return "table:" + ",".join(str(v) for v in self.values)

    def weight(self, n):
        _check_rank(n)
        if n > len(self.values):
            raise IndexError(f"rank {n} beyond table of {len(self.values)}")
        return self.values[n - 1]

    def weight_log2(self, n):
        w = self.weight(n)
        return math.log2(w.mantissa) - w.exponent

    def tail_bound(self, n):
        # exact suffix sum within the table; zero tail beyond it
        total = Fraction(0)
        for v in self.values[n:]:
            total += v.as_fraction()
        if total == 0:
            return None  # an empty tail bounds nothing useful
        return Exp2Rational(total)

    def tail_over_weight(self, n):
        tb = self.tail_bound(n)
        if tb is None:
            return None
        return tb / Exp2Rational.from_dyadic(self.weight(n))

    def block_sum(self, j_lo, j_hi, bit_budget=1 << 21):
        total = Fraction(0)
        for j in range(j_lo, j_hi + 1):
            total += self.weight(j).as_fraction()
        return Exp2Rational(total)


def _check_rank(n: int) -> None:
    if n < 1:
        raise ValueError("weight ranks are 1-based")


def parse_weights(text: str) -> WeightSeq:
    """Parse 'ones', 'superexp', 'geometric:<ratio>', 'table:<v1,v2,...>'."""
    if text == "ones":
        return OnesWeights()
    if text == "superexp":
        return SuperExpWeights()
    if text.startswith("geometric:"):
        return GeometricWeights(_parse_ratio(text.split(":", 1)[1]))
    if text.startswith("table:"):
        parts = text.split(":", 1)[1].split(",")
        return TableWeights([_parse_ratio(p) for p in parts])
    raise ParseError(f"unknown weight rule {text!r}")


def _parse_ratio(text: str) -> Dyadic:
    text = text.strip()
    try:
        return Dyadic.parse(text)
    except ParseError:
        pass
    try:
        return Dyadic.coerce(Fraction(text))
    except (ValueError, ZeroDivisionError, ParseError) as exc:
        raise ParseError(f"not a dyadic ratio: {text!r}") from exc
