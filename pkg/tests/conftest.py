import warnings

import numpy as np
import pytest

from hyperspec import HypergeometricFunction
from hyperspec.real_line import NearDegenerateWarning

TEST_PARAMS = (-1.0 / 3.0, 0.5, 0.5)


@pytest.fixture(scope="session")
def test_fn():
    """F(-1/3, 1/2, 1/2, .) with the complex fields built once per session."""
    fn = HypergeometricFunction(*TEST_PARAMS)
    fn.complex
    return fn


@pytest.fixture(scope="session")
def fn_cache():
    """Builds keyed by parameters, shared across test modules."""
    cache = {}

    def get(a, b, c):
        key = (complex(a), complex(b), complex(c))
        if key not in cache:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", NearDegenerateWarning)
                cache[key] = HypergeometricFunction(a, b, c)
        return cache[key]

    return get


def random_generic_triples(count, seed, bound=5.0, margin=0.05):
    """Real triples with |a|, |b|, |c| <= bound and every integer-distance margin > ``margin``."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        a, b, c = rng.uniform(-bound, bound, 3)
        dists = [abs(w - round(w)) for w in (c, c - a - b, b - a)]
        if min(dists) > margin:
            out.append((a, b, c))
    return out
