import random

import pytest

from soltess.moebius import (
    ExtendedRational,
    IDENTITY,
    MoebiusMap,
    RHO,
    RHO_SQ,
    SIGMA,
)

GENS = (SIGMA, RHO, RHO_SQ)


def random_rational(rng: random.Random, bound: int = 30) -> ExtendedRational:
    while True:
        p = rng.randint(-bound, bound)
        q = rng.randint(0, bound)
        if (p, q) != (0, 0):
            return ExtendedRational(p, q)


def random_moebius(rng: random.Random, max_len: int = 12) -> MoebiusMap:
    m = IDENTITY
    for _ in range(rng.randint(0, max_len)):
        m = m * rng.choice(GENS)
    return m


@pytest.fixture
def rng() -> random.Random:
    return random.Random(987654321)
