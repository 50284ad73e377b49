import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def mixed_input(rng: np.random.Generator, n: int) -> bytes:
    """Concatenated runs of random, low-entropy, repeated and zero bytes."""
    parts = []
    size = 0
    while size < n:
        kind = int(rng.integers(0, 4))
        m = int(rng.integers(1, 4096))
        if kind == 0:
            chunk = rng.integers(0, 256, m, dtype=np.uint8).tobytes()
        elif kind == 1:
            chunk = rng.integers(0, int(rng.integers(2, 8)), m, dtype=np.uint8).tobytes()
        elif kind == 2:
            unit = rng.integers(0, 256, int(rng.integers(1, 40)), dtype=np.uint8).tobytes()
            chunk = (unit * (m // len(unit) + 1))[:m]
        else:
            chunk = bytes(m)
        parts.append(chunk)
        size += m
    return b"".join(parts)[:n]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
