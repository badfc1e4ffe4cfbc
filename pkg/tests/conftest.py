import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("default")


def direct_norm(coeffs: dict, p: float, points: int = 2**20) -> float:
    """Independent trapezoid oracle: evaluates the polynomial term by term, no FFT."""
    theta = -np.pi + 2 * np.pi * np.arange(points) / points
    vals = np.zeros(points, dtype=complex)
    for n, c in coeffs.items():
        vals += complex(c) * np.exp(1j * n * theta)
    return float(np.mean(np.abs(vals) ** p)) ** (1 / p)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
