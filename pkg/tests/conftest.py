import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import wavedmd as wd

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def karate():
    return wd.karate_club()


@pytest.fixture(scope="session")
def weak_line():
    return wd.generate_weak_line(50, 25, 5.0, 1.0)


@pytest.fixture(scope="session")
def planted():
    return wd.generate_planted_partition(
        4, 100, 0.2, 0.01, (1.0, 2.0), (0.1, 0.5), seed=7
    )


def random_connected_graph(seed, n_lo=4, n_hi=12, p=0.45):
    """Seeded random weighted connected graph; resamples until connected."""
    attempt = 0
    while True:
        rng = np.random.default_rng((seed, attempt))
        n = int(rng.integers(n_lo, n_hi + 1))
        iu, ju = np.triu_indices(n, k=1)
        mask = rng.random(iu.size) < p
        if mask.any():
            w = rng.uniform(0.5, 2.0, int(mask.sum()))
            g = wd.make_graph(n, zip(iu[mask], ju[mask], w))
            if g.is_connected() and np.all(g.weighted_degrees() > 0):
                return g
        attempt += 1
