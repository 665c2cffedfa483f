"""
Transform update step

Well-conditioned transform (A1, A3):
    min_W ||WX - B||_F^2 + 0.5 lam ||W||_F^2 - lam log|det W|
    XX^H + 0.5 lam I = L L^H,  L^-1 X B^H = V S R^H
    W = 0.5 R (S + (S^2 + 2 lam I)^(1/2)) V^H L^-1

Unitary transform (A2):
    min_W ||WX - B||_F^2  s.t.  W^H W = I
    X B^H = U S V^H,  W = V U^H

Regularizer:
    Q(W) = -log|det W| + 0.5 ||W||_F^2  >=  n / 2
"""

import logging

import numpy as np
import scipy.linalg as la

from errors import ArgumentError

logger = logging.getLogger(__name__)

EIG_CLAMP = 1e-14


def eval_Q(W: np.ndarray) -> float:
    """
    Evaluate Q(W) = -log|det W| + 0.5 ||W||_F^2.

    Returns:
        The regularizer value, or +inf when W is singular
    """
    _, logabsdet = np.linalg.slogdet(W)
    if not np.isfinite(logabsdet):
        return np.inf
    return float(-logabsdet + 0.5 * np.linalg.norm(W, 'fro') ** 2)


def condition_number(W: np.ndarray) -> float:
    """Ratio of the extreme singular values of W (inf if singular)."""
    sv = np.linalg.svd(W, compute_uv=False)
    if sv[-1] == 0:
        return np.inf
    return float(sv[0] / sv[-1])


def unitarity_error(W: np.ndarray) -> float:
    """||W^H W - I||_F"""
    return float(np.linalg.norm(W.conj().T @ W - np.eye(W.shape[0]), 'fro'))


def transform_objective(W: np.ndarray, X: np.ndarray, B: np.ndarray, lam: float = None) -> float:
    """
    Cost minimized by the transform step.

    Args:
        W, X, B: Transform, patch matrix and codes
        lam: Regularizer weight; None for the unitary problem

    Returns:
        ||WX - B||_F^2 (+ 0.5 lam ||W||_F^2 - lam log|det W|)
    """
    fit = np.linalg.norm(W @ X - B, 'fro') ** 2
    if lam is None:
        return float(fit)
    return float(fit + lam * eval_Q(W))


def _check_inputs(X: np.ndarray, B: np.ndarray) -> None:
    if X.ndim != 2 or X.shape != B.shape:
        raise ArgumentError(f"X and B must have the same 2D shape, got {X.shape} and {B.shape}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(B))):
        raise ArgumentError("X and B must be finite")


def _hermitian_inv_sqrt(M: np.ndarray) -> np.ndarray:
    """Inverse of the positive definite square root, via EVD."""
    evals, evecs = la.eigh(M)
    evals = np.maximum(evals, EIG_CLAMP * evals.max())
    return (evecs / np.sqrt(evals)) @ evecs.conj().T


def wellcond_factor(X: np.ndarray, lam: float, method: str = 'cholesky') -> np.ndarray:
    """
    Compute L^-1 for XX^H + 0.5 lam I = L L^H.

    Args:
        X: (n, N) patch matrix
        lam: Regularizer weight, lam > 0
        method: 'cholesky' (lower-triangular L) or 'evd' (Hermitian square root)

    Returns:
        (n, n) matrix L^-1
    """
    if not lam > 0:
        raise ArgumentError(f"lambda must be positive, got {lam}")
    n = X.shape[0]
    # M = XX^H + 0.5 lam I
    M = X @ X.conj().T + 0.5 * lam * np.eye(n)
    if method == 'cholesky':
        L = la.cholesky(M, lower=True)
        return la.solve_triangular(L, np.eye(n, dtype=L.dtype), lower=True)
    if method == 'evd':
        return _hermitian_inv_sqrt(M)
    raise ArgumentError(f"Unknown factorization method: {method}")


def update_transform_wellcond(X: np.ndarray, B: np.ndarray, lam: float,
                              factor: np.ndarray = None, method: str = 'cholesky') -> np.ndarray:
    """
    Closed-form global minimizer of the well-conditioned transform step.

    Args:
        X: (n, N) patch matrix
        B: (n, N) sparse codes
        lam: Regularizer weight (the solver passes lambda0 * N)
        factor: Precomputed L^-1 from wellcond_factor (optional)
        method: Factorization used when factor is not given

    Returns:
        (n, n) nonsingular transform
    """
    X = np.asarray(X)
    B = np.asarray(B)
    _check_inputs(X, B)
    if not (lam > 0 and np.isfinite(lam)):
        raise ArgumentError(f"lambda must be positive and finite, got {lam}")
    # L^-1 with XX^H + 0.5 lam I = LL^H
    Linv = wellcond_factor(X, lam, method) if factor is None else factor

    # Full SVD: L^-1 X B^H = V diag(sig) R^H
    V, sig, Rh = la.svd(Linv @ X @ B.conj().T)
    # W = 0.5 R (sig + (sig^2 + 2 lam)^(1/2)) V^H L^-1
    scale = 0.5 * (sig + np.sqrt(sig ** 2 + 2 * lam))
    return (Rh.conj().T * scale) @ V.conj().T @ Linv


def update_transform_unitary(X: np.ndarray, B: np.ndarray) -> np.ndarray:
    """
    Closed-form unitary minimizer of ||WX - B||_F^2 (orthogonal Procrustes).

    Args:
        X: (n, N) patch matrix
        B: (n, N) sparse codes

    Returns:
        (n, n) unitary transform V U^H
    """
    X = np.asarray(X)
    B = np.asarray(B)
    _check_inputs(X, B)
    # Full SVD: X B^H = U diag(sig) V^H, then W = V U^H
    U, _, Vh = la.svd(X @ B.conj().T)
    return Vh.conj().T @ U.conj().T


# Test the implementation
if __name__ == '__main__':
    print("Testing transform updates...")
    rng = np.random.default_rng(0)
    X = rng.standard_normal((4, 50)) + 1j * rng.standard_normal((4, 50))
    B = rng.standard_normal((4, 50)) + 1j * rng.standard_normal((4, 50))

    assert abs(eval_Q(np.eye(4)) - 2.0) < 1e-12
    print("✓ Q(I) = n/2")

    W = update_transform_wellcond(X, B, lam=3.0)
    W_evd = update_transform_wellcond(X, B, lam=3.0, method='evd')
    assert np.linalg.norm(W - W_evd) < 1e-10 * np.linalg.norm(W)
    print("✓ Cholesky and EVD factors agree")

    U = update_transform_unitary(X, B)
    assert unitarity_error(U) < 1e-10
    print("✓ Unitary update is unitary")

    print("\n✓ All tests passed!")
