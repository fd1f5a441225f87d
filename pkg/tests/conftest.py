import random
from fractions import Fraction

import pytest

from opgrowth.opspace import PauliString, TIOperator
from opgrowth.scalars import EXACT, ExactComplex


def random_string(rng: random.Random, max_support: int = 6, site_range: int = 8) -> PauliString:
    n = rng.randint(0, max_support)
    sites = rng.sample(range(-site_range, site_range), n)
    return PauliString((s, rng.randint(1, 3)) for s in sites)


def random_operator(rng: random.Random, n_terms: int = 4, max_support: int = 4) -> TIOperator:
    pairs = []
    for _ in range(rng.randint(1, n_terms)):
        ps = random_string(rng, max_support=max_support, site_range=3)
        coeff = ExactComplex(
            Fraction(rng.randint(-4, 4), rng.randint(1, 5)),
            Fraction(rng.randint(-4, 4), rng.randint(1, 5)),
        )
        pairs.append((ps, coeff))
    return TIOperator.from_strings(pairs, EXACT)


@pytest.fixture
def rng():
    return random.Random(20240817)
