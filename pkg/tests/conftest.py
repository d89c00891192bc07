import numpy as np
import pytest

from bittrunc.videopipe import FramePlanar420, VideoClip


def noise_frame(rng, width, height):
    return FramePlanar420(
        rng.integers(0, 256, (height, width), dtype=np.uint8),
        rng.integers(0, 256, (height // 2, width // 2), dtype=np.uint8),
        rng.integers(0, 256, (height // 2, width // 2), dtype=np.uint8),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def noise_clip(rng):
    return VideoClip(64, 48, [noise_frame(rng, 64, 48) for _ in range(3)])


@pytest.fixture
def gray_clip():
    return VideoClip(64, 64, [FramePlanar420.from_luma(np.full((64, 64), 128, dtype=np.uint8)) for _ in range(2)])
