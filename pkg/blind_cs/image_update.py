"""
Image update step

    min_x  sum_j ||W P_j x - b_j||^2 + nu ||Ax - y||^2   s.t.  ||x||_2 <= C

Normal equation for a multiplier mu >= 0:
    (G + nu A^H A + mu I) x = sum_j P_j^T W^H b_j + nu A^H y,   G = sum_j P_j^T W^H W P_j

With stride 1 and wrap-around patches, G = F^H diag(gamma) F, so for Fourier
sampling every k-space location decouples:
    Fx(k) = S(k) / (gamma(k) + mu)                       k not in Omega
    Fx(k) = (S(k) + nu S0(k)) / (gamma(k) + nu + mu)     k in Omega

The multiplier is 0 when ||x_0||^2 <= C^2, otherwise the root of the
decreasing convex function f(mu) = ||x_mu||^2 = C^2.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from scipy.sparse.linalg import LinearOperator, cg

from errors import CapabilityError, ConfigurationError, ConvergenceError, NumericalError
from patches import PatchConfig, adjoint_accumulate, apply_patch_gram
from sensing import SensingOperator, dft2, idft2

logger = logging.getLogger(__name__)

DENSE_LIMIT = 4096
MULTIPLIER_RTOL = 1e-10
CG_RTOL = 1e-8


@dataclass
class MultiplierState:
    mu: float
    residual: float
    iterations: int


# ==============================================================================
# BCCB spectrum
# ==============================================================================

def build_bccb_spectrum(W: np.ndarray, cfg: PatchConfig, shape: tuple) -> np.ndarray:
    """
    Eigenvalues of G on the 2D DFT grid.

    G is applied (through patch operations) to an image with a 1 in the top
    left corner; the DFT of that impulse response is the spectrum.

    Returns:
        (h, w) positive real array gamma
    """
    if not cfg.circulant:
        raise ConfigurationError(
            f"The BCCB spectrum needs stride 1 with wrap-around patches, got stride={cfg.stride}, wrap={cfg.wrap}")
    shape = tuple(shape)
    impulse = np.zeros(shape, dtype=complex)
    impulse[0, 0] = 1
    a1 = apply_patch_gram(W, impulse, cfg)
    # Spectrum of G: sqrt(p) F a1 with a1 = G e0
    gamma = np.fft.fft2(a1)

    scale = np.abs(gamma).max()
    if np.abs(gamma.imag).max() > 1e-10 * scale:
        raise NumericalError(f"Spectrum of G is not real: max imaginary part {np.abs(gamma.imag).max():.3e}")
    gamma = gamma.real
    if gamma.min() <= 0:
        raise NumericalError(f"Spectrum of G is not positive: min {gamma.min():.3e}")
    return gamma


# ==============================================================================
# Lagrange multiplier
# ==============================================================================

def newton_multiplier(ftilde, C: float, rtol: float = MULTIPLIER_RTOL, max_iter: int = 100) -> MultiplierState:
    """
    Solve f(mu) = C^2 for a decreasing convex f by safeguarded Newton.

    Args:
        ftilde: Callable mu -> (f(mu), f'(mu))
        C: Energy bound, C > 0
        rtol: Stop when |f(mu) - C^2| <= rtol * C^2
        max_iter: Newton iteration cap

    Returns:
        MultiplierState with mu = 0 when f(0) <= C^2
    """
    target = C * C
    f0, _ = ftilde(0.0)
    if f0 <= target:
        return MultiplierState(mu=0.0, residual=f0 - target, iterations=0)

    # bracket [lo, hi] with f(hi) < C^2
    lo, hi = 0.0, 1.0
    for _ in range(2000):
        if ftilde(hi)[0] < target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ConvergenceError("Could not bracket the Lagrange multiplier")

    mu = lo
    for it in range(1, max_iter + 1):
        f, df = ftilde(mu)
        res = f - target
        if abs(res) <= rtol * target:
            return MultiplierState(mu=mu, residual=res, iterations=it)
        if res > 0:
            lo = mu
        else:
            hi = mu
        step = mu - res / df if df < 0 else np.nan
        mu = step if lo < step < hi else 0.5 * (lo + hi)
    raise ConvergenceError(f"Newton did not converge in {max_iter} iterations (residual {res:.3e})")


def _spectral_ftilde(weights: np.ndarray, denom: np.ndarray):
    """f(mu) = sum |num|^2 / (denom + mu)^2 and its derivative."""
    def ftilde(mu):
        d = denom + mu
        return float(np.sum(weights / d ** 2)), float(-2.0 * np.sum(weights / d ** 3))
    return ftilde


# ==============================================================================
# MRI image update
# ==============================================================================

def mri_image_update(W: np.ndarray, B: np.ndarray, S0: np.ndarray, omega: np.ndarray,
                     nu: float, C: float, gamma: np.ndarray, cfg: PatchConfig,
                     return_state: bool = False):
    """
    Closed-form image update for Cartesian Fourier sampling.

    Args:
        W: (n, n) transform
        B: (n, N) sparse codes
        S0: (h, w) zero-filled measurements on the unshifted DFT grid
        omega: (h, w) boolean sampled set on the same grid
        nu: Fidelity weight
        C: Energy bound
        gamma: Spectrum of G from build_bccb_spectrum
        cfg: Patch geometry (stride 1, wrap)
        return_state: Also return the MultiplierState

    Returns:
        (h, w) complex image (and the multiplier state if requested)
    """
    if not cfg.circulant:
        raise ConfigurationError("The closed-form MRI update needs stride 1 with wrap-around patches")
    shape = S0.shape
    if omega.shape != shape or gamma.shape != shape:
        raise ConfigurationError(f"Mask {omega.shape} and spectrum {gamma.shape} must match k-space {shape}")

    # S = F sum_j P_j^T W^H b_j
    S = dft2(adjoint_accumulate(W.conj().T @ B, cfg, shape))
    # Numerator S + nu S0 and denominator gamma + nu on Omega, S and gamma elsewhere
    num = np.where(omega, S + nu * S0, S)
    denom = gamma + np.where(omega, nu, 0.0)
    if denom.min() <= 0:
        raise NumericalError(f"Non-positive denominator {denom.min():.3e} in the k-space update")

    state = newton_multiplier(_spectral_ftilde(np.abs(num) ** 2, denom), C)
    logger.debug(f"mri update: mu={state.mu:.3e} after {state.iterations} Newton steps")
    # x = F^H (num / (denom + mu))
    x = idft2(num / (denom + state.mu))
    return (x, state) if return_state else x


# ==============================================================================
# Generic image update
# ==============================================================================

def _patch_rhs(W: np.ndarray, B: np.ndarray, cfg: PatchConfig, shape: tuple) -> np.ndarray:
    return adjoint_accumulate(W.conj().T @ B, cfg, shape)


def _normal_operator(W, A: SensingOperator, nu: float, cfg: PatchConfig, shape: tuple):
    def matvec(v):
        img = v.reshape(shape)
        out = apply_patch_gram(W, img, cfg) + nu * A.adjoint(A.apply(img))
        return out.ravel()
    p = shape[0] * shape[1]
    return LinearOperator((p, p), matvec=matvec, rmatvec=matvec, dtype=complex)


def _dense_normal_matrix(W, A: SensingOperator, nu: float, cfg: PatchConfig, shape: tuple) -> np.ndarray:
    h, w = shape
    p = h * w
    H = np.empty((p, p), dtype=complex)
    for i in range(p):
        e = np.zeros(p, dtype=complex)
        e[i] = 1
        H[:, i] = apply_patch_gram(W, e.reshape(shape), cfg).ravel()
    Ad = A.to_dense()
    H += nu * (Ad.conj().T @ Ad)
    return 0.5 * (H + H.conj().T)


def generic_image_update(W: np.ndarray, B: np.ndarray, A: SensingOperator, y: np.ndarray,
                         nu: float, C: float, cfg: PatchConfig, method: str = 'auto',
                         return_state: bool = False):
    """
    Exact image update for an arbitrary sensing operator.

    Args:
        W, B: Transform and sparse codes
        A: Sensing operator
        y: Measurement vector
        nu: Fidelity weight
        C: Energy bound
        cfg: Patch geometry
        method: 'auto' (CG with mu = 0, EVD + Newton if ||x|| > C),
                'cg' (CG only, constraint must be inactive) or 'evd'
        return_state: Also return the MultiplierState

    Returns:
        (h, w) complex image (and the multiplier state if requested)
    """
    shape = tuple(A.shape)
    p = shape[0] * shape[1]
    rhs = (_patch_rhs(W, B, cfg, shape) + nu * A.adjoint(y)).ravel()

    if method in ('auto', 'cg'):
        x, info = cg(_normal_operator(W, A, nu, cfg, shape), rhs, rtol=CG_RTOL, atol=0.0, maxiter=10 * p)
        if info > 0:
            raise ConvergenceError(f"CG did not converge in {10 * p} iterations")
        if np.linalg.norm(x) <= C:
            state = MultiplierState(mu=0.0, residual=float(np.vdot(x, x).real - C * C), iterations=0)
            return (x.reshape(shape), state) if return_state else x.reshape(shape)
        if method == 'cg':
            raise CapabilityError("The energy constraint is active; the CG path only handles mu = 0")
        logger.debug("CG solution exceeds the energy bound, switching to EVD + Newton")
    elif method != 'evd':
        raise ConfigurationError(f"Unknown image update method: {method}")

    if p > DENSE_LIMIT:
        raise CapabilityError(f"Dense EVD path limited to p <= {DENSE_LIMIT}, got p = {p}")
    sig, U = la.eigh(_dense_normal_matrix(W, A, nu, cfg, shape))
    if sig.min() <= 0:
        raise NumericalError(f"Normal matrix is not positive definite: min eigenvalue {sig.min():.3e}")
    # z = U^H rhs, then f(mu) = sum |z_i|^2 / (sig_i + mu)^2
    z = U.conj().T @ rhs
    state = newton_multiplier(_spectral_ftilde(np.abs(z) ** 2, sig), C)
    # x = U (Sigma + mu I)^-1 z
    x = U @ (z / (sig + state.mu))
    return (x.reshape(shape), state) if return_state else x.reshape(shape)
