"""
Brute-force reference implementations.

These share no code with the fast paths: patch geometry, the DFT and the
multiplier search are all written out again here, and dense problems are
solved with numpy's eigh plus plain bisection. Everything is guarded to
desk-scale sizes.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from errors import CapabilityError, ConfigurationError, NumericalError

DENSE_LIMIT = 4096
EXHAUSTIVE_LIMIT = 12


@dataclass
class DenseProblem:
    """
    Explicit form of the image update.

    G:   (p, p) sum_j P_j^T W^H W P_j
    A:   (m, p) sensing matrix
    rhs: (p,) patch right-hand side sum_j P_j^T W^H b_j
    """
    G: np.ndarray
    A: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        p = self.G.shape[0]
        if self.G.shape != (p, p) or self.A.shape[1] != p or self.rhs.shape != (p,):
            raise ConfigurationError(
                f"Inconsistent dense problem: G {self.G.shape}, A {self.A.shape}, rhs {self.rhs.shape}")
        if np.linalg.norm(self.G - self.G.conj().T) > 1e-10 * max(np.linalg.norm(self.G), 1.0):
            raise NumericalError("G is not Hermitian")
        smallest = np.linalg.eigvalsh(self.G)[0]
        if not smallest > 0:
            raise NumericalError(f"G is not positive definite: smallest eigenvalue {smallest:.3e}")


def _guard(p: int) -> None:
    if p > DENSE_LIMIT:
        raise CapabilityError(f"Dense oracle limited to p <= {DENSE_LIMIT}, got p = {p}")


def _patch_pixels(cfg, shape: tuple) -> list:
    """Raster pixel indices of every patch, one list per patch, looping corners explicitly."""
    h, w = shape
    side = cfg.side
    if cfg.wrap:
        corners = [(r, c) for r in range(0, h, cfg.stride) for c in range(0, w, cfg.stride)]
    else:
        corners = [(r, c) for r in range(0, h - side + 1, cfg.stride) for c in range(0, w - side + 1, cfg.stride)]
    patches = []
    for r, c in corners:
        pixels = []
        for col in range(side):
            for row in range(side):
                pixels.append(((r + row) % h) * w + (c + col) % w)
        patches.append(pixels)
    return patches


def dense_G(W: np.ndarray, cfg, shape: tuple) -> np.ndarray:
    """
    Assemble G = sum_j P_j^T W^H W P_j by looping over patches.

    Returns:
        (p, p) complex matrix
    """
    h, w = shape
    p = h * w
    _guard(p)
    M = W.conj().T @ W
    G = np.zeros((p, p), dtype=complex)
    for pixels in _patch_pixels(cfg, shape):
        G[np.ix_(pixels, pixels)] += M
    return G


def dense_problem(W: np.ndarray, B: np.ndarray, A: np.ndarray, cfg, shape: tuple) -> DenseProblem:
    """Build the DenseProblem for transform W, codes B and an explicit sensing matrix A."""
    p = shape[0] * shape[1]
    _guard(p)
    Z = W.conj().T @ B
    rhs = np.zeros(p, dtype=complex)
    for j, pixels in enumerate(_patch_pixels(cfg, shape)):
        rhs[pixels] += Z[:, j]
    return DenseProblem(G=dense_G(W, cfg, shape), A=np.asarray(A, dtype=complex), rhs=rhs)


def dense_constrained_solve(problem: DenseProblem, nu: float, y: np.ndarray, C: float) -> np.ndarray:
    """
    Exact minimizer of x^H G x - 2 Re(x^H rhs) + nu ||Ax - y||^2 over ||x|| <= C.

    Returns:
        (p,) complex vector
    """
    G, A = problem.G, problem.A
    _guard(G.shape[0])
    H = G + nu * (A.conj().T @ A)
    H = 0.5 * (H + H.conj().T)
    sig, U = np.linalg.eigh(H)
    z = U.conj().T @ (problem.rhs + nu * (A.conj().T @ y))
    w = np.abs(z) ** 2

    def energy(mu):
        return np.sum(w / (sig + mu) ** 2)

    target = C * C
    if energy(0.0) <= target:
        return U @ (z / sig)

    lo, hi = 0.0, 1.0
    while energy(hi) > target:
        lo, hi = hi, 2 * hi
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if energy(mid) > target:
            lo = mid
        else:
            hi = mid
    return U @ (z / (sig + hi))


def exhaustive_sparse_project(Z: np.ndarray, s: int) -> np.ndarray:
    """
    Best s-sparse approximation of Z by enumerating all supports.

    Supports are visited in lexicographic order of flat (row, column)
    indices; only a strictly better support replaces the incumbent.
    """
    Z = np.asarray(Z)
    size = Z.size
    if size > EXHAUSTIVE_LIMIT:
        raise CapabilityError(f"Exhaustive projection limited to {EXHAUSTIVE_LIMIT} entries, got {size}")
    flat = Z.ravel()
    energy = np.abs(flat) ** 2
    best, best_energy = (), -1.0
    for support in itertools.combinations(range(size), min(s, size)):
        kept = float(sum(energy[k] for k in support))
        if kept > best_energy:
            best, best_energy = support, kept
    B = np.zeros_like(flat)
    for k in best:
        B[k] = flat[k]
    return B.reshape(Z.shape)


def exhaustive_hard_threshold(Z: np.ndarray, eta: float) -> np.ndarray:
    """Per-entry minimizer of |z - b|^2 + eta^2 [b != 0]; keeps z when both costs tie."""
    Z = np.asarray(Z)
    B = np.zeros_like(Z)
    for idx in np.ndindex(Z.shape):
        cost_zero = abs(Z[idx]) ** 2
        cost_keep = eta ** 2
        if cost_keep <= cost_zero:
            B[idx] = Z[idx]
    return B


def transform_first_order_residual(W: np.ndarray, X: np.ndarray, B: np.ndarray, lam: float) -> float:
    """
    Relative norm of 2 W X X^H - 2 B X^H + lam W - lam W^-H.

    Raises:
        NumericalError: If W is singular.
    """
    try:
        Winv = np.linalg.inv(W)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Transform is singular: {e}") from e
    XXh = X @ X.conj().T
    BXh = B @ X.conj().T
    R = 2 * W @ XXh - 2 * BXh + lam * W - lam * Winv.conj().T
    scale = np.linalg.norm(2 * BXh) + lam * np.linalg.norm(W)
    return float(np.linalg.norm(R) / scale)


def naive_dft2(image: np.ndarray) -> np.ndarray:
    """Unitary 2D DFT (DC at (0, 0)) by explicit DFT matrices."""
    image = np.asarray(image, dtype=complex)
    h, w = image.shape

    def dft_matrix(size):
        k = np.arange(size)
        return np.exp(-2j * np.pi * np.outer(k, k) / size) / np.sqrt(size)

    return dft_matrix(h) @ image @ dft_matrix(w).T
