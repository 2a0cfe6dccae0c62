"""Independent brute-force oracles for the test suite.

Everything here computes over fractions.Fraction and plain integers, on
purpose: none of the package's dyadic machinery is used, so a bug in the
library cannot hide behind an oracle that shares its code path.
"""

from fractions import Fraction


def frac(value) -> Fraction:
    """Exact Fraction view of a Dyadic (or pass through exact rationals)."""
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    return Fraction(value.mantissa, 1 << value.exponent)


def block_points(blocks, lo: Fraction, hi: Fraction, closed_hi=False):
    """All points of union of 2^-m Z on [n_lo, n_hi) blocks inside the window."""
    out = []
    for m, n_lo, n_hi in blocks:
        if Fraction(n_hi) <= lo or Fraction(n_lo) > hi:
            continue  # block cannot meet the window
        step = Fraction(1, 1 << m)
        j = n_lo * (1 << m)
        j_end = n_hi * (1 << m)
        while j < j_end:
            p = j * step
            if (lo <= p < hi) or (closed_hi and p == hi):
                out.append(p)
            j += 1
    return sorted(out)


def grid_count_in_set(intervals, x: Fraction, n: int) -> int:
    """#((x + 2^n Z) in union of [lo, hi)) over one period [0, 1)."""
    spacing = Fraction(1, 1 << (-n))
    x0 = x - (x // spacing) * spacing
    count = 0
    i = 0
    p = x0
    while p < 1:
        for lo, hi in intervals:
            if lo <= p < hi:
                count += 1
                break
        i += 1
        p = x0 + i * spacing
    return count


def quantize_oracle(v: Fraction) -> Fraction:
    """The power of two q with q < v <= 2q, searched directly."""
    assert 0 < v <= 1
    q = Fraction(1)
    while not q < v:
        q /= 2
    assert q < v <= 2 * q
    return q


def superexp_tail(n: int, terms: int = 64) -> tuple[Fraction, Fraction]:
    """(partial tail, crude remainder bound) for sum_{j>n} 2^(-j^2)."""
    partial = Fraction(0)
    for j in range(n + 1, n + 1 + terms):
        partial += Fraction(1, 1 << (j * j))
    j_next = n + 1 + terms
    remainder = Fraction(2, 1 << (j_next * j_next))
    return partial, remainder


def geometric_tail(ratio: Fraction, n: int) -> Fraction:
    return ratio ** (n + 1) / (1 - ratio)


def mean_and_stderr(values):
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / max(n - 1, 1)
    return mean, (var / n) ** 0.5
