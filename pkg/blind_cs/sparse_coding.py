"""
Sparse coding in the transform domain

Projection onto the s-l0 ball:  min_B ||Z - B||_F^2  s.t.  ||B||_0 <= s
Hard thresholding:              min_B ||Z - B||_F^2 + eta^2 ||B||_0

Both have exact solutions: keep the s largest-magnitude entries, or keep
every entry with |Z_ij| >= eta.
"""

import numpy as np

from errors import ArgumentError


def project_s_l0(Z: np.ndarray, s: int) -> np.ndarray:
    """
    Zero out all but the s largest-magnitude entries of Z.

    Ties at the s-th magnitude keep the entries with the lexicographically
    lowest (row, column) index.

    Args:
        Z: (n, N) array
        s: Aggregate sparsity budget, 0 <= s <= Z.size

    Returns:
        Array of Z's shape with at most s nonzeros, equal to Z on its support
    """
    Z = np.asarray(Z)
    if not isinstance(s, (int, float, np.integer, np.floating)) or isinstance(s, bool) \
            or not np.isfinite(s) or int(s) != s or not 0 <= s <= Z.size:
        raise ArgumentError(f"Sparsity {s} must be an integer in [0, {Z.size}]")
    s = int(s)
    B = np.zeros_like(Z)
    if s == 0:
        return B
    # C order flat index == lexicographic (row, column); stable sort keeps it on ties
    order = np.argsort(-np.abs(Z).ravel(), kind='stable')
    keep = order[:s]
    B.flat[keep] = Z.flat[keep]
    return B


def hard_threshold(Z: np.ndarray, eta: float) -> np.ndarray:
    """
    Keep the entries of Z with |Z_ij| >= eta, zero the rest.

    Args:
        Z: Array of any shape
        eta: Threshold, eta > 0

    Returns:
        Thresholded copy of Z
    """
    if not eta > 0:
        raise ArgumentError(f"Threshold eta must be positive, got {eta}")
    Z = np.asarray(Z)
    return np.where(np.abs(Z) >= eta, Z, 0).astype(Z.dtype, copy=False)


def sparsity(B: np.ndarray) -> int:
    """Number of nonzero entries."""
    return int(np.count_nonzero(B))


# Test the implementation
if __name__ == '__main__':
    print("Testing sparse coding...")

    Z = np.array([[3, -1], [0.5, 2j]])
    B = project_s_l0(Z, 2)
    assert np.array_equal(B, np.array([[3, 0], [0, 2j]]))
    print("✓ Projection keeps the two largest entries")

    B = project_s_l0(np.ones((2, 2)), 3)
    assert np.array_equal(B, np.array([[1, 1], [1, 0]]))
    print("✓ Ties keep the lowest (row, column) indices")

    B = hard_threshold(np.array([0.5, 1.0, -2.0]), 1.0)
    assert np.array_equal(B, np.array([0, 1.0, -2.0]))
    print("✓ Hard thresholding retains |z| == eta")

    print("\n✓ All tests passed!")
