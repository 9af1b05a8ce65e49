import random

import pytest

from vslab.concept import ConceptClass, InstanceSpace


def random_class(rng: random.Random, max_n: int = 7, max_h: int = 32) -> ConceptClass:
    n = rng.randint(1, max_n)
    size = rng.randint(3, min(max_h, 2 ** n)) if 2 ** n >= 3 else 3
    if 2 ** n < 3:
        n = 2
        size = rng.randint(3, 4)
    masks = rng.sample(range(2 ** n), size)
    return ConceptClass(InstanceSpace(tuple(f"p{i}" for i in range(n))), tuple(masks), "random")


@pytest.fixture
def rng():
    return random.Random(20240611)
