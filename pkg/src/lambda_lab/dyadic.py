"""Exact arithmetic on dyadic rationals m/2^e and half-open dyadic intervals.

Every value is kept in canonical form (exponent 0, or odd mantissa) so that
value equality coincides with representation equality.  The mantissa is
confined to a signed 128-bit width; any operation that would need more bits
raises :class:`DyadicOverflowError` instead of rounding.  Exponents are
unbounded, which keeps quantities like 2^(-n^2) cheap to carry around even
when n is in the millions.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

from .errors import DyadicOverflowError, ParseError

#: Signed mantissa width; |mantissa| must fit in MANTISSA_BITS-1 magnitude bits.
MANTISSA_BITS = 128
_MANT_MAX = (1 << (MANTISSA_BITS - 1)) - 1

#: Above this exponent a binary64 rendering of the value may round.
FLOAT_SAFE_EXPONENT = 52

_DYADIC_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*2\^(\d+)|\*\s*2\^-(\d+))?\s*$")


def _check_width(m: int) -> int:
    if m > _MANT_MAX or m < -_MANT_MAX - 1:
        raise DyadicOverflowError(
            f"mantissa needs {m.bit_length()} bits, limit is {MANTISSA_BITS - 1}"
        )
    return m


class Dyadic:
    """Immutable dyadic rational mantissa/2^exponent in canonical form."""

    __slots__ = ("mantissa", "exponent")

    def __init__(self, mantissa: int, exponent: int = 0):
        if exponent < 0:
            # Allow 2^k scaling via negative exponent on input for convenience.
            mantissa <<= -exponent
            exponent = 0
        if mantissa == 0:
            exponent = 0
        elif exponent > 0:
            tz = (mantissa & -mantissa).bit_length() - 1
            if tz:
                shift = min(tz, exponent)
                mantissa >>= shift
                exponent -= shift
        _check_width(mantissa)
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic values are immutable")

    @classmethod
    def _raw(cls, mantissa: int, exponent: int) -> "Dyadic":
        """Bypass canonicalisation for values already known canonical."""
        self = object.__new__(cls)
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "exponent", exponent)
        return self

    # ------------------------------------------------------------------
    # construction helpers

    @classmethod
    def pow2(cls, k: int) -> "Dyadic":
        """Exact 2^k for any integer k (negative k gives 2^-|k|)."""
        if k >= 0:
            return cls(_check_width(1 << k), 0)
        return cls._raw(1, -k)

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        """Parse 'm', 'm/2^e' or 'm*2^-e'."""
        m = _DYADIC_RE.match(text)
        if not m:
            raise ParseError(f"not a dyadic literal: {text!r}")
        mant = int(m.group(1))
        exp = int(m.group(2) or m.group(3) or 0)
        return cls(mant, exp)

    @classmethod
    def coerce(cls, value) -> "Dyadic":
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, int):
            return cls(value, 0)
        if isinstance(value, str):
            return cls.parse(value)
        if isinstance(value, Fraction):
            den = value.denominator
            if den & (den - 1):
                raise ParseError(f"{value} has a non power-of-two denominator")
            return cls(value.numerator, den.bit_length() - 1)
        raise ParseError(f"cannot interpret {value!r} as a dyadic rational")

    # ------------------------------------------------------------------
    # predicates and conversions

    def is_zero(self) -> bool:
        return self.mantissa == 0

    def is_integer(self) -> bool:
        return self.exponent == 0

    def is_pow2(self) -> bool:
        """True when the value is exactly 2^k for some integer k."""
        m = self.mantissa
        return m > 0 and (m & (m - 1)) == 0

    def log2_exact(self) -> int:
        """Exponent k with self == 2^k; raises when not a power of two."""
        if not self.is_pow2():
            raise ValueError(f"{self} is not a power of two")
        return self.mantissa.bit_length() - 1 - self.exponent

    def as_fraction(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.exponent)

    def as_float(self) -> float:
        """binary64 rendering; check float_lossy before trusting it."""
        try:
            return math.ldexp(self.mantissa, -self.exponent)
        except OverflowError:
            return math.inf if self.mantissa > 0 else -math.inf

    @property
    def float_lossy(self) -> bool:
        """True when as_float() may not represent the value exactly."""
        return (
            abs(self.mantissa).bit_length() > 53
            or self.exponent > FLOAT_SAFE_EXPONENT
        )

    def __float__(self) -> float:
        return self.as_float()

    def __bool__(self) -> bool:
        return self.mantissa != 0

    # ------------------------------------------------------------------
    # arithmetic (exact or DyadicOverflowError)

    def __add__(self, other):
        other = _to_dyadic(other)
        if other is NotImplemented:
            return NotImplemented
        a_m, a_e, b_m, b_e = self.mantissa, self.exponent, other.mantissa, other.exponent
        if a_e == b_e:
            return Dyadic(a_m + b_m, a_e)
        if a_e < b_e:
            a_m, a_e, b_m, b_e = b_m, b_e, a_m, a_e
        shift = a_e - b_e
        if shift > MANTISSA_BITS + 256:
            # b << shift dwarfs the mantissa budget; no cancellation possible.
            raise DyadicOverflowError(
                f"exponent gap {shift} exceeds mantissa width {MANTISSA_BITS}"
            )
        return Dyadic(a_m + (b_m << shift), a_e)

    __radd__ = __add__

    def __neg__(self):
        return Dyadic._raw(-self.mantissa, self.exponent)

    def __sub__(self, other):
        other = _to_dyadic(other)
        if other is NotImplemented:
            return NotImplemented
        return self.__add__(Dyadic._raw(-other.mantissa, other.exponent))

    def __rsub__(self, other):
        other = _to_dyadic(other)
        if other is NotImplemented:
            return NotImplemented
        return other.__sub__(self)

    def __mul__(self, other):
        other = _to_dyadic(other)
        if other is NotImplemented:
            return NotImplemented
        return Dyadic(self.mantissa * other.mantissa, self.exponent + other.exponent)

    __rmul__ = __mul__

    def __abs__(self):
        return Dyadic._raw(abs(self.mantissa), self.exponent)

    def shift(self, k: int) -> "Dyadic":
        """Exact multiplication by 2^k."""
        if self.mantissa == 0:
            return self
        e = self.exponent - k
        if e >= 0:
            return Dyadic._raw(self.mantissa, e)
        return Dyadic(_check_width(self.mantissa << -e), 0)

    # ------------------------------------------------------------------
    # total order without huge shifts

    def _cmp(self, other: "Dyadic") -> int:
        a_m, b_m = self.mantissa, other.mantissa
        if a_m == 0 or b_m == 0 or (a_m > 0) != (b_m > 0):
            a_s = (a_m > 0) - (a_m < 0)
            b_s = (b_m > 0) - (b_m < 0)
            return (a_s > b_s) - (a_s < b_s)
        neg = a_m < 0
        # Compare magnitudes via the position of the leading bit first, so
        # gigantic exponent gaps never materialise as shifted integers.
        la = abs(a_m).bit_length() - self.exponent
        lb = abs(b_m).bit_length() - other.exponent
        if la != lb:
            res = 1 if la > lb else -1
        else:
            shift = self.exponent - other.exponent
            ua, ub = abs(a_m), abs(b_m)
            if shift >= 0:
                ub <<= shift  # |shift| <= mantissa width here
            else:
                ua <<= -shift
            res = (ua > ub) - (ua < ub)
        return -res if neg else res

    def __eq__(self, other):
        other = _to_dyadic(other)
        if other is NotImplemented:
            return NotImplemented
        return self.mantissa == other.mantissa and self.exponent == other.exponent

    def __ne__(self, other):
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    def __lt__(self, other):
        other = _to_dyadic(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) < 0

    def __le__(self, other):
        other = _to_dyadic(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) <= 0

    def __gt__(self, other):
        other = _to_dyadic(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) > 0

    def __ge__(self, other):
        other = _to_dyadic(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) >= 0

    def __hash__(self):
        return hash((self.mantissa, self.exponent))

    # ------------------------------------------------------------------
    # integer parts and grid rounding

    def floor_int(self) -> int:
        return self.mantissa >> self.exponent

    def ceil_int(self) -> int:
        return -((-self.mantissa) >> self.exponent)

    def __str__(self):
        return f"{self.mantissa}/2^{self.exponent}"

    def __repr__(self):
        return f"Dyadic({self.mantissa}, {self.exponent})"


def _to_dyadic(value):
    if isinstance(value, Dyadic):
        return value
    if isinstance(value, int):
        return Dyadic(value, 0)
    return NotImplemented


#: Reusable constants.
ZERO = Dyadic._raw(0, 0)
ONE = Dyadic._raw(1, 0)
HALF = Dyadic._raw(1, 1)


def compare(a: Dyadic, b: Dyadic) -> int:
    """Total-order comparison: -1, 0 or 1 (LT, EQ, GT)."""
    return a._cmp(Dyadic.coerce(b))


def floor_to_grid(x: Dyadic, e: int) -> Dyadic:
    """Largest multiple of 2^-e that is <= x; e must be >= 0."""
    if e < 0:
        raise ValueError("grid exponent must be nonnegative")
    if x.exponent <= e:
        return x  # already on the grid
    shift = x.exponent - e
    return Dyadic(x.mantissa >> shift, e)


def ceil_to_grid(x: Dyadic, e: int) -> Dyadic:
    """Smallest multiple of 2^-e that is >= x; e must be >= 0."""
    if e < 0:
        raise ValueError("grid exponent must be nonnegative")
    if x.exponent <= e:
        return x
    shift = x.exponent - e
    return Dyadic(-((-x.mantissa) >> shift), e)


class DyadicInterval:
    """Half-open interval [lo, hi) with dyadic endpoints, lo < hi."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo = Dyadic.coerce(lo)
        hi = Dyadic.coerce(hi)
        if not lo < hi:
            raise ValueError(f"need lo < hi, got [{lo}, {hi})")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, name, value):
        raise AttributeError("DyadicInterval values are immutable")

    @property
    def length(self) -> Dyadic:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        x = Dyadic.coerce(x)
        return self.lo <= x and x < self.hi

    def intersects(self, other: "DyadicInterval") -> bool:
        return self.lo < other.hi and other.lo < self.hi

    def split(self, t: int):
        """The 2^t equal dyadic pieces of the interval, in order."""
        if t < 0:
            raise ValueError("t must be nonnegative")
        piece = self.length.shift(-t)
        cuts = [self.lo]
        for _ in range(1 << t):
            cuts.append(cuts[-1] + piece)
        # Guard against drift: the construction is exact, so the final cut
        # must land on hi.
        assert cuts[-1] == self.hi
        return [DyadicInterval(cuts[i], cuts[i + 1]) for i in range(1 << t)]

    def __eq__(self, other):
        return (
            isinstance(other, DyadicInterval)
            and self.lo == other.lo
            and self.hi == other.hi
        )

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __str__(self):
        return f"[{self.lo}, {self.hi})"

    def __repr__(self):
        return f"DyadicInterval({self.lo!r}, {self.hi!r})"
