"""Counter-based Bernoulli sampling with exactly dyadic probabilities.

The sampler is a pure function of (seed, index): there is no sequential
state, so membership decisions can be evaluated in any order, from any
thread, with identical results.  A draw with probability m/2^e succeeds
exactly when the top e bits of the mixed 64-bit word, read as an integer,
are below m; for the common 2^-kappa levels this degenerates to "top kappa
bits are all zero", which carries zero bias.
"""

from __future__ import annotations

import numpy as np

from .dyadic import Dyadic

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

MAX_PROB_BITS = 64


def mix64(seed: int, index: int) -> int:
    """SplitMix64 finalizer applied to seed XOR index*golden-gamma."""
    z = (seed ^ ((index * _GOLDEN) & _MASK)) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def bernoulli(seed: int, index: int, prob: Dyadic) -> bool:
    """One draw with exactly dyadic probability prob = m/2^e, e <= 64."""
    num, bits = _prob_parts(prob)
    if bits == 0:
        return True
    return (mix64(seed, index) >> (64 - bits)) < num


def bernoulli_pow2(seed: int, index: int, kappa: int) -> bool:
    """One draw with probability 2^-kappa (kappa = 0 always succeeds)."""
    if kappa == 0:
        return True
    if kappa > MAX_PROB_BITS:
        raise ValueError(f"kappa {kappa} exceeds {MAX_PROB_BITS} sampler bits")
    return (mix64(seed, index) >> (64 - kappa)) == 0


def _prob_parts(prob: Dyadic) -> tuple[int, int]:
    if not (Dyadic(0) < prob and prob <= Dyadic(1)):
        raise ValueError(f"probability {prob} outside (0, 1]")
    if prob == Dyadic(1):
        return 1, 0
    if prob.exponent > MAX_PROB_BITS:
        raise ValueError(
            f"probability {prob} finer than {MAX_PROB_BITS} sampler bits"
        )
    return prob.mantissa, prob.exponent


# ----------------------------------------------------------------------
# vectorised variants (bit-identical to the scalar path)

def _mix64_array(seed: int, indices: np.ndarray) -> np.ndarray:
    idx = indices.astype(np.uint64, copy=False)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK) ^ (idx * np.uint64(_GOLDEN))
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def bernoulli_array(seed: int, indices: np.ndarray, prob: Dyadic) -> np.ndarray:
    """Vectorised draws for one seed over an array of indices."""
    num, bits = _prob_parts(prob)
    if bits == 0:
        return np.ones(len(indices), dtype=bool)
    top = _mix64_array(seed, indices) >> np.uint64(64 - bits)
    return top < np.uint64(num)


def bernoulli_matrix(seeds: np.ndarray, indices: np.ndarray, prob: Dyadic) -> np.ndarray:
    """Draws for a seed vector crossed with an index vector (seeds x indices)."""
    num, bits = _prob_parts(prob)
    if bits == 0:
        return np.ones((len(seeds), len(indices)), dtype=bool)
    idx = indices.astype(np.uint64, copy=False)
    sds = seeds.astype(np.uint64, copy=False)
    with np.errstate(over="ignore"):
        z = sds[:, None] ^ (idx[None, :] * np.uint64(_GOLDEN))
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    top = (z ^ (z >> np.uint64(31))) >> np.uint64(64 - bits)
    return top < np.uint64(num)
