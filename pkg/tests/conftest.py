import numpy as np
import pytest

from supertkit.corpus import build_topic
from supertkit.embed import FallbackEncoder


@pytest.fixture
def toy_topic():
    docs = {
        "d1": "The cats ran fast. Dogs chased the cats. A bird watched quietly.",
        "d2": "Rivers flow to the sea. The sea is vast and deep.",
    }
    summaries = {
        "s1": "Cats ran and dogs chased.",
        "s2": "The sea is deep.",
        "s3": "Nothing relevant here whatsoever.",
    }
    ratings = {"s1": 0.9, "s2": 0.6, "s3": 0.1}
    return build_topic("t1", docs, summaries, ratings)


@pytest.fixture
def backend():
    return FallbackEncoder(dimension=32, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
