"""
Reconstruction quality metrics, computed between image magnitudes.

PSNR = 20 log10(peak(|ref|) sqrt(p) / || |recon| - |ref| ||_2)
HFEN = || LoG(|recon|) - LoG(|ref|) ||_2   (15 x 15 LoG kernel, sigma 1.5)
"""

from dataclasses import dataclass

import numpy as np
import scipy.ndimage as nd

from errors import ArgumentError, ConfigurationError

LOG_SIZE = 15
LOG_SIGMA = 1.5


@dataclass
class MetricReport:
    psnr_db: float
    hfen: float
    reference_peak: float

    def to_dict(self) -> dict:
        return {'psnr_db': self.psnr_db, 'hfen': self.hfen, 'reference_peak': self.reference_peak}


def _magnitudes(recon, reference) -> tuple:
    recon = np.abs(np.asarray(recon))
    reference = np.abs(np.asarray(reference))
    if recon.shape != reference.shape:
        raise ConfigurationError(f"Image shapes differ: {recon.shape} vs {reference.shape}")
    return recon, reference


def psnr(recon: np.ndarray, reference: np.ndarray) -> float:
    """
    Peak signal-to-noise ratio in dB.

    Returns:
        PSNR, or +inf when the magnitude images are identical
    """
    recon, reference = _magnitudes(recon, reference)
    peak = reference.max()
    if peak == 0:
        raise ArgumentError("Reference image is zero; PSNR is undefined")
    err = np.linalg.norm(recon - reference)
    if err == 0:
        return np.inf
    return float(20 * np.log10(peak * np.sqrt(reference.size) / err))


def log_kernel(size: int = LOG_SIZE, sigma: float = LOG_SIGMA) -> np.ndarray:
    """Rotationally symmetric Laplacian of Gaussian sampled on the integer grid, zero-sum."""
    r = np.arange(size) - (size - 1) / 2
    yy, xx = np.meshgrid(r, r, indexing='ij')
    q = (xx ** 2 + yy ** 2) / (2 * sigma ** 2)
    kernel = -(1 - q) * np.exp(-q) / (np.pi * sigma ** 4)
    return kernel - kernel.mean()


def hfen(recon: np.ndarray, reference: np.ndarray) -> float:
    """High frequency error norm between magnitude images (symmetric padding)."""
    recon, reference = _magnitudes(recon, reference)
    kernel = log_kernel()
    diff = nd.convolve(recon, kernel, mode='reflect') - nd.convolve(reference, kernel, mode='reflect')
    return float(np.linalg.norm(diff))


def report(recon: np.ndarray, reference: np.ndarray) -> MetricReport:
    return MetricReport(psnr_db=psnr(recon, reference), hfen=hfen(recon, reference),
                        reference_peak=float(np.abs(reference).max()))
