"""
Image / patch geometry

Patch j is a side x side window whose top-left corner is the j-th corner in
raster (row-major) order. Inside a patch, pixels are vectorized
column-major: entry k of a patch vector is the pixel at row offset
k % side and column offset k // side. With wrap=True, windows that cross
the image border continue on the opposite side.

    extract_patches:     X[:, j] = P_j x
    adjoint_accumulate:  sum_j P_j^T z_j
    overlap_diag:        diagonal of sum_j P_j^T P_j
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from errors import ConfigurationError


@dataclass(frozen=True)
class PatchConfig:
    side: int = 6
    stride: int = 1
    wrap: bool = True

    @property
    def n(self) -> int:
        """Patch vector length."""
        return self.side * self.side

    @property
    def circulant(self) -> bool:
        """True when sum_j P_j^T M P_j is a 2D circular convolution."""
        return self.stride == 1 and self.wrap

    def validate(self, shape: tuple) -> None:
        """
        Check the configuration against an image shape.

        Raises:
            ConfigurationError: If the patch does not fit the image.
        """
        if len(shape) != 2:
            raise ConfigurationError(f"Expected a 2D image shape, got {shape}")
        h, w = shape
        if self.side < 1 or self.stride < 1:
            raise ConfigurationError(
                f"Patch side and stride must be >= 1, got side={self.side}, stride={self.stride}")
        if self.side > min(h, w):
            raise ConfigurationError(f"Patch side {self.side} exceeds image shape {h}x{w}")


def corner_positions(cfg: PatchConfig, shape: tuple) -> tuple:
    """Row and column offsets of the top-left corners along each axis."""
    h, w = shape
    if cfg.wrap:
        return np.arange(0, h, cfg.stride), np.arange(0, w, cfg.stride)
    return np.arange(0, h - cfg.side + 1, cfg.stride), np.arange(0, w - cfg.side + 1, cfg.stride)


@lru_cache(maxsize=32)
def patch_indices(cfg: PatchConfig, shape: tuple) -> np.ndarray:
    """
    Flat pixel index of every patch entry.

    Returns:
        Read-only (n, N) integer array; column j lists the raster indices
        of the pixels of patch j in patch-vector order.
    """
    cfg.validate(shape)
    h, w = shape
    rows, cols = corner_positions(cfg, shape)
    k = np.arange(cfg.n)
    dr, dc = k % cfg.side, k // cfg.side

    # corners in raster order: row-major over (rows, cols)
    r0 = np.repeat(rows, len(cols))
    c0 = np.tile(cols, len(rows))
    rr = (r0[None, :] + dr[:, None]) % h
    cc = (c0[None, :] + dc[:, None]) % w
    idx = rr * w + cc
    idx.setflags(write=False)
    return idx


def num_patches(cfg: PatchConfig, shape: tuple) -> int:
    return patch_indices(cfg, tuple(shape)).shape[1]


def _check_image(image: np.ndarray) -> None:
    if image.ndim != 2:
        raise ConfigurationError(f"Image must be 2D, got shape {image.shape}")
    if not np.all(np.isfinite(image)):
        raise ConfigurationError("Image contains NaN or Inf samples")


def extract_patches(image: np.ndarray, cfg: PatchConfig) -> np.ndarray:
    """
    Build the patch matrix of an image.

    Args:
        image: (h, w) array
        cfg: Patch geometry

    Returns:
        (n, N) complex array whose columns are the vectorized patches
    """
    image = np.asarray(image)
    _check_image(image)
    idx = patch_indices(cfg, image.shape)
    return image.astype(complex, copy=False).ravel()[idx]


def adjoint_accumulate(patches: np.ndarray, cfg: PatchConfig, shape: tuple) -> np.ndarray:
    """
    Scatter patch columns back onto the image grid and sum the overlaps.

    Args:
        patches: (n, N) array
        cfg: Patch geometry
        shape: (h, w) of the output image

    Returns:
        (h, w) complex image sum_j P_j^T z_j
    """
    shape = tuple(shape)
    idx = patch_indices(cfg, shape)
    patches = np.asarray(patches)
    if patches.shape != idx.shape:
        raise ConfigurationError(
            f"Patch matrix shape {patches.shape} does not match {idx.shape} for image {shape}")
    p = shape[0] * shape[1]
    flat = idx.ravel()
    # bincount sums in index order, so the result is bitwise reproducible
    re = np.bincount(flat, weights=patches.real.ravel(), minlength=p)
    im = np.bincount(flat, weights=patches.imag.ravel(), minlength=p)
    return (re + 1j * im).reshape(shape)


def overlap_diag(cfg: PatchConfig, shape: tuple) -> np.ndarray:
    """Per-pixel count of covering patches, as a (h, w) float array."""
    shape = tuple(shape)
    idx = patch_indices(cfg, shape)
    counts = np.bincount(idx.ravel(), minlength=shape[0] * shape[1])
    return counts.astype(float).reshape(shape)


def apply_patch_gram(W: np.ndarray, image: np.ndarray, cfg: PatchConfig) -> np.ndarray:
    """Apply G = sum_j P_j^T W^H W P_j to an image through patch operations."""
    X = extract_patches(image, cfg)
    return adjoint_accumulate(W.conj().T @ (W @ X), cfg, image.shape)
