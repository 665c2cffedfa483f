"""
Desk-scale test images, real-valued in [0, 1] and stored as complex arrays.
"""

import numpy as np
from skimage.data import shepp_logan_phantom
from skimage.transform import resize

from errors import ArgumentError

KINDS = ('shepp-logan', 'smooth-blobs')


def _check_shape(shape: tuple) -> tuple:
    if len(shape) != 2 or min(shape) < 1:
        raise ArgumentError(f"Phantom shape must be (h, w) with h, w >= 1, got {shape}")
    return tuple(int(d) for d in shape)


def shepp_logan(shape: tuple = (64, 64)) -> np.ndarray:
    """Shepp-Logan head phantom resampled to `shape`."""
    shape = _check_shape(shape)
    image = resize(shepp_logan_phantom(), shape, order=1, anti_aliasing=True)
    return np.clip(image, 0.0, 1.0).astype(complex)


def smooth_blobs(shape: tuple = (64, 64), seed: int = 0, count: int = 8) -> np.ndarray:
    """Sum of `count` random isotropic Gaussian blobs, scaled to a peak of 1."""
    shape = _check_shape(shape)
    h, w = shape
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[:h, :w]
    image = np.zeros(shape)
    for _ in range(count):
        cy, cx = rng.uniform(0.2, 0.8) * h, rng.uniform(0.2, 0.8) * w
        width = rng.uniform(0.05, 0.15) * min(h, w)
        image += rng.uniform(0.3, 1.0) * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * width ** 2))
    return (image / image.max()).astype(complex)


def make_phantom(kind: str, shape: tuple, seed: int = 0) -> np.ndarray:
    if kind == 'shepp-logan':
        return shepp_logan(shape)
    if kind == 'smooth-blobs':
        return smooth_blobs(shape, seed)
    raise ArgumentError(f"Unknown phantom {kind!r}, expected one of {KINDS}")
