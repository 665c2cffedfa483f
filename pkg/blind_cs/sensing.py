"""
Fourier sensing

k-space convention (simulation boundary):
    K = fftshift(fft2(ifftshift(x)))     DC at (h//2, w//2)
with the orthonormal DFT, so F_u is a row subset of a unitary matrix.

Inside the reconstruction, k-space lives on the unshifted DFT grid of x
(DC at (0, 0)); dft_grid_data converts measured data to that grid.

The fidelity weight nu is quoted in unnormalized DFT units (fft2 without
scaling, intensities peak-normalized to 1). Against the orthonormal F_u
used here the data term therefore carries weight nu * p, see
SensingOperator.fidelity_scale.
"""

import logging

import numpy as np
from numpy.fft import fft2, ifft2, fftshift, ifftshift

from errors import ArgumentError, ConfigurationError

logger = logging.getLogger(__name__)


# ==============================================================================
# Transforms
# ==============================================================================

def dft2(image: np.ndarray) -> np.ndarray:
    """Unitary 2D DFT on the unshifted grid."""
    return fft2(image, norm='ortho')


def idft2(kspace: np.ndarray) -> np.ndarray:
    """Inverse of dft2."""
    return ifft2(kspace, norm='ortho')


def centered_kspace(image: np.ndarray) -> np.ndarray:
    """fftshift(fft2(ifftshift(x))) with the unitary DFT."""
    return fftshift(fft2(ifftshift(image), norm='ortho'))


def centered_image(kspace: np.ndarray) -> np.ndarray:
    """Inverse of centered_kspace."""
    return fftshift(ifft2(ifftshift(kspace), norm='ortho'))


def _check_mask(mask: np.ndarray, shape: tuple) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != tuple(shape):
        raise ConfigurationError(f"Mask shape {mask.shape} does not match image shape {tuple(shape)}")
    if not mask.any():
        raise ConfigurationError("Mask samples no k-space location")
    return mask


# ==============================================================================
# Simulation and zero filling
# ==============================================================================

def simulate_kspace(image: np.ndarray, mask: np.ndarray, noise_std: float = 0.0,
                    seed: int = None) -> np.ndarray:
    """
    Simulate undersampled k-space of an image.

    Args:
        image: (h, w) array
        mask: (h, w) boolean sampling mask (centered convention)
        noise_std: Std of complex white Gaussian noise (noise_std / sqrt(2) per component)
        seed: Seed of the noise generator

    Returns:
        Centered, zero-filled (h, w) complex k-space
    """
    image = np.asarray(image)
    mask = _check_mask(mask, image.shape)
    if noise_std < 0:
        raise ArgumentError(f"Noise std must be >= 0, got {noise_std}")
    K = centered_kspace(image)
    if noise_std > 0:
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal(K.shape) + 1j * rng.standard_normal(K.shape)
        K = K + (noise_std / np.sqrt(2)) * noise
    return np.where(mask, K, 0)


def zero_fill_recon(kspace: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Inverse of the simulation convention applied to the zero-filled grid."""
    kspace = np.asarray(kspace)
    mask = _check_mask(mask, kspace.shape)
    return centered_image(np.where(mask, kspace, 0))


def dft_grid_data(kspace: np.ndarray, mask: np.ndarray) -> tuple:
    """
    Move measured data to the unshifted DFT grid of the image.

    Returns:
        (S0, omega): zero-filled data F F_u^H y, and the boolean sampled set
        on the same grid
    """
    S0 = dft2(zero_fill_recon(kspace, mask))
    omega = ifftshift(np.asarray(mask, dtype=bool))
    return np.where(omega, S0, 0), omega


# ==============================================================================
# Sampling masks
# ==============================================================================

def _radial_weights(distance: np.ndarray, density_power: float) -> np.ndarray:
    # (1 + d)^-P relative to the nearest candidate, so the largest weight is 1
    if distance.size == 0:
        return np.ones(0)
    log_d = np.log1p(distance)
    return np.exp(-density_power * (log_d - log_d.min()))


def _draw(rng, candidates: np.ndarray, weights: np.ndarray, count: int) -> np.ndarray:
    if count == 0:
        return np.array([], dtype=int)
    p = weights / weights.sum()
    positive = int(np.count_nonzero(p > 0))
    if positive < count:
        raise ArgumentError(
            f"Sampling density is too steep: only {positive} candidates have nonzero weight "
            f"but {count} samples are needed; lower density_power")
    return rng.choice(candidates, size=count, replace=False, p=p)


def gen_mask_random2d(shape: tuple, accel: float, density_power: float = 2.0,
                      center_radius: float = 8, seed: int = 0) -> np.ndarray:
    """
    Variable density 2D random sampling mask.

    A disk of pixels closer than center_radius to DC is always sampled; the
    other samples are drawn without replacement with probability proportional
    to (1 + distance)^-density_power.

    Args:
        shape: (h, w)
        accel: Acceleration factor R > 1; m = round(h * w / R)
        density_power: Decay exponent of the sampling density
        center_radius: Radius of the fully sampled center disk (pixels)
        seed: Generator seed

    Returns:
        (h, w) boolean mask
    """
    h, w = shape
    if not accel > 1:
        raise ArgumentError(f"Acceleration must be > 1, got {accel}")
    m = int(round(h * w / accel))
    yy, xx = np.mgrid[:h, :w]
    dist = np.hypot(yy - h // 2, xx - w // 2).ravel()
    center = dist < center_radius
    n_center = int(center.sum())
    if n_center > m or m < 1:
        raise ArgumentError(
            f"Center disk holds {n_center} samples but the budget is m={m}; lower center_radius or accel")

    rng = np.random.default_rng(seed)
    outside = np.flatnonzero(~center)
    picked = _draw(rng, outside, _radial_weights(dist[outside], density_power), m - n_center)
    flags = center.copy()
    flags[picked] = True
    logger.debug(f"random2d mask: m={m}, center={n_center}")
    return flags.reshape(h, w)


def gen_mask_cartesian(shape: tuple, accel: float, density_power: float = 2.0,
                       center_lines: int = 8, seed: int = 0) -> np.ndarray:
    """
    Cartesian mask with variable density random phase encodes (full rows).

    Args:
        shape: (h, w)
        accel: Acceleration factor R > 1; round(h / R) rows are sampled
        density_power: Decay exponent over the row distance to DC
        center_lines: Rows around DC that are always sampled
        seed: Generator seed

    Returns:
        (h, w) boolean mask, each row all-True or all-False
    """
    h, w = shape
    if not accel > 1:
        raise ArgumentError(f"Acceleration must be > 1, got {accel}")
    m_rows = int(round(h / accel))
    if center_lines > m_rows or m_rows < 1:
        raise ArgumentError(
            f"{center_lines} center lines exceed the budget of {m_rows} rows; lower center_lines or accel")

    rows = np.arange(h)
    start = h // 2 - center_lines // 2
    center = (rows >= start) & (rows < start + center_lines)
    rng = np.random.default_rng(seed)
    outside = rows[~center]
    dist = np.abs(outside - h // 2).astype(float)
    picked = _draw(rng, outside, _radial_weights(dist, density_power), m_rows - int(center.sum()))
    selected = center.copy()
    selected[picked] = True
    return np.repeat(selected[:, None], w, axis=1)


# ==============================================================================
# Sensing operators
# ==============================================================================

class SensingOperator:
    """Linear map from (h, w) images to measurement vectors."""

    shape: tuple

    @property
    def fidelity_scale(self) -> float:
        """Factor turning the user fidelity weight nu into the weight on ||Ax - y||^2."""
        return 1.0

    def apply(self, image: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def pseudo_inverse(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def num_measurements(self) -> int:
        raise NotImplementedError

    def to_dense(self) -> np.ndarray:
        """Materialize the (m, p) matrix by applying the operator to basis images."""
        h, w = self.shape
        p = h * w
        A = np.empty((self.num_measurements, p), dtype=complex)
        for i in range(p):
            e = np.zeros(p, dtype=complex)
            e[i] = 1
            A[:, i] = self.apply(e.reshape(h, w))
        return A


class FourierSampling(SensingOperator):
    """
    Undersampled Fourier encoding F_u.

    Measurements are the sampled centered k-space values in raster order.
    """

    def __init__(self, mask: np.ndarray):
        mask = np.asarray(mask, dtype=bool)
        self.mask = _check_mask(mask, mask.shape)
        self.shape = mask.shape

    @property
    def num_measurements(self) -> int:
        return int(self.mask.sum())

    @property
    def fidelity_scale(self) -> float:
        # nu is quoted against the unnormalized DFT: ||F_raw v||^2 = p ||F v||^2
        return float(self.mask.size)

    def apply(self, image: np.ndarray) -> np.ndarray:
        return centered_kspace(image)[self.mask]

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        return centered_image(self.to_kspace(y))

    def pseudo_inverse(self, y: np.ndarray) -> np.ndarray:
        # rows of F_u are orthonormal
        return self.adjoint(y)

    def to_kspace(self, y: np.ndarray) -> np.ndarray:
        """Scatter a measurement vector onto the zero-filled centered grid."""
        K = np.zeros(self.shape, dtype=complex)
        K[self.mask] = y
        return K

    def from_kspace(self, kspace: np.ndarray) -> np.ndarray:
        """Gather the sampled values of a centered k-space grid."""
        kspace = np.asarray(kspace)
        if kspace.shape != self.shape:
            raise ConfigurationError(f"k-space shape {kspace.shape} does not match mask {self.shape}")
        return kspace[self.mask].astype(complex)


class DenseSensing(SensingOperator):
    """Explicit (m, p) sensing matrix acting on raster-vectorized images."""

    def __init__(self, matrix: np.ndarray, shape: tuple):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[1] != shape[0] * shape[1]:
            raise ConfigurationError(f"Matrix shape {matrix.shape} does not act on {shape} images")
        self.matrix = matrix
        self.shape = tuple(shape)

    @property
    def num_measurements(self) -> int:
        return self.matrix.shape[0]

    def apply(self, image: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(image).ravel()

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        return (self.matrix.conj().T @ y).reshape(self.shape)

    def pseudo_inverse(self, y: np.ndarray) -> np.ndarray:
        x, *_ = np.linalg.lstsq(self.matrix, y, rcond=None)
        return x.reshape(self.shape)

    def to_dense(self) -> np.ndarray:
        return self.matrix


if __name__ == '__main__':
    print("Testing sensing...")
    rng = np.random.default_rng(1)
    x = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    full = np.ones((8, 8), dtype=bool)
    assert np.allclose(zero_fill_recon(simulate_kspace(x, full), full), x, atol=1e-12)
    print("✓ Full-mask round trip")

    mask = gen_mask_random2d((64, 64), 4, seed=7)
    assert mask.sum() == 1024
    print(f"✓ random2d mask samples {mask.sum()} locations")

    print("\n✓ All tests passed!")
