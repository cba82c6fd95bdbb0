import numpy as np
import pytest


@pytest.fixture
def structured_image():
    """64x64 RGB test image with gradients and a sharp square."""
    img = np.zeros((64, 64, 3), dtype=np.uint8)
    img[:, :, 0] = np.linspace(0, 255, 64).astype(np.uint8)[None, :]
    img[:, :, 1] = np.linspace(0, 255, 64).astype(np.uint8)[:, None]
    img[16:48, 16:48, 2] = 255
    return img


@pytest.fixture
def diagonal_card():
    """Sharp diagonal stripes, deliberately off the JPEG block grid."""
    yy, xx = np.mgrid[0:64, 0:64]
    base = np.where((xx + 2 * yy) % 17 < 8, 255, 0).astype(np.uint8)
    return np.stack([base, np.roll(base, 3, axis=1), np.roll(base, 7, axis=0)], axis=-1)
