import numpy as np
import pytest

from errors import ConfigurationError
from patches import (PatchConfig, adjoint_accumulate, apply_patch_gram, extract_patches, num_patches,
                     overlap_diag, patch_indices)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_patch_matrix_shape():
    assert extract_patches(np.zeros((8, 8)), PatchConfig(side=3)).shape == (9, 64)
    assert extract_patches(np.zeros((8, 10)), PatchConfig(side=3, stride=2, wrap=False)).shape == (9, 12)
    assert num_patches(PatchConfig(side=4, stride=3, wrap=True), (8, 8)) == 9


def test_first_patch_is_column_major():
    image = np.arange(64).reshape(8, 8)
    X = extract_patches(image, PatchConfig(side=2))
    assert np.array_equal(X[:, 0].real, [0, 8, 1, 9])
    # second corner is one column to the right
    assert np.array_equal(X[:, 1].real, [1, 9, 2, 10])


def test_last_patch_wraps_around():
    image = np.arange(64).reshape(8, 8)
    X = extract_patches(image, PatchConfig(side=2))
    assert np.array_equal(X[:, -1].real, [63, 7, 56, 0])


def test_index_table_is_read_only():
    idx = patch_indices(PatchConfig(side=3), (6, 6))
    with pytest.raises(ValueError):
        idx[0, 0] = 1


@pytest.mark.parametrize('cfg', [PatchConfig(side=3), PatchConfig(side=3, stride=2, wrap=False),
                                 PatchConfig(side=4, stride=3, wrap=True)])
def test_adjoint_identity(rng, cfg):
    x = crandn(rng, 9, 11)
    Z = crandn(rng, cfg.n, num_patches(cfg, x.shape))
    lhs = np.vdot(extract_patches(x, cfg), Z)
    rhs = np.vdot(x, adjoint_accumulate(Z, cfg, x.shape))
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


def test_overlap_counts():
    assert np.all(overlap_diag(PatchConfig(side=3), (7, 7)) == 9)
    counts = overlap_diag(PatchConfig(side=3, wrap=False), (7, 7))
    assert counts[0, 0] == 1
    assert counts[3, 3] == 9


def test_unitary_gram_is_scaled_identity(rng):
    cfg = PatchConfig(side=3)
    W, _ = np.linalg.qr(crandn(rng, cfg.n, cfg.n))
    x = crandn(rng, 8, 8)
    assert np.allclose(apply_patch_gram(W, x, cfg), cfg.n * x, atol=1e-12)


def test_patch_larger_than_image():
    with pytest.raises(ConfigurationError):
        extract_patches(np.zeros((4, 4)), PatchConfig(side=5))


def test_adjoint_shape_mismatch():
    with pytest.raises(ConfigurationError):
        adjoint_accumulate(np.zeros((9, 10)), PatchConfig(side=3), (4, 4))


def test_non_finite_image():
    image = np.zeros((6, 6))
    image[2, 2] = np.nan
    with pytest.raises(ConfigurationError):
        extract_patches(image, PatchConfig(side=3))


@pytest.mark.parametrize('cfg', [PatchConfig(side=3, stride=2, wrap=False), PatchConfig(side=4, stride=3, wrap=True),
                                 PatchConfig(side=2, stride=2, wrap=True)])
def test_adjoint_of_extract_scales_by_overlap(rng, cfg):
    x = crandn(rng, 9, 12)
    back = adjoint_accumulate(extract_patches(x, cfg), cfg, x.shape)
    assert np.allclose(back, overlap_diag(cfg, x.shape) * x, atol=1e-12)
