import random

import pytest
from hypothesis import HealthCheck, settings

from talent.sampling import seed

settings.register_profile(
    "talent", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("talent")


@pytest.fixture
def rng():
    """Random source seeded from TALENT_SEED (default 0)."""
    return random.Random(seed())
