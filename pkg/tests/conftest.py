import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lambda_lab import (
    Dyadic,
    DyadicInterval,
    PiecewiseWitness,
    dyadic_ladder,
    powers_of_two,
)


@pytest.fixture(scope="session")
def ladder20():
    """Dyadic ladder with the k = 0 block included: 2^k points per unit window."""
    return dyadic_ladder(20)


@pytest.fixture(scope="session")
def ladder12_k1():
    """The classic ladder starting at block k = 1 (first point is 1)."""
    return dyadic_ladder(12, k_min=1)


@pytest.fixture(scope="session")
def lacunary_demo():
    """Powers of two up to 2^16 with the two-interval demo witness."""
    lam = powers_of_two(16)
    witness = PiecewiseWitness(
        [
            (DyadicInterval(1, 4), Dyadic(1, 1)),
            (DyadicInterval(4, 6), Dyadic(1, 2)),
        ]
    )
    return lam, witness
