import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stokes4d.frontend import DVector

settings.register_profile(
    "ci",
    deadline=None,
    max_examples=60,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


def observations(block):
    """Per-slot observation vectors of a simulated block."""
    return [
        DVector.from_polar(
            block.rmx[j], block.rmy[j], block.th2[j], block.dmy[j], block.gm2[j]
        )
        for j in range(len(block.rmx))
    ]


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
