import numpy as np
import pytest

from fresco.curves import Curve, normalize


def random_curve(
    rng: np.random.Generator, max_vertices: int = 12, scale: float = 100
) -> Curve:
    """Normalized curve from up to max_vertices uniform values in [-scale, scale]."""
    size = int(rng.integers(1, max_vertices + 1))
    return normalize(rng.uniform(-scale, scale, size=size))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def write_file(tmp_path):
    def _write(name: str, text: str):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
