import numpy as np
import pytest

from container import MAGIC, decode_container, encode_container, read_container, write_container
from errors import DataError


def test_mask_layout():
    mask = np.array([[True, False, True], [False, False, True]])
    data = encode_container(mask, 'mask')
    header = b'{"dims":[2,3],"dtype":"u8","kind":"mask"}'
    assert data[:8] == MAGIC
    assert data[8:12] == len(header).to_bytes(4, 'little')
    assert data[12:12 + len(header)] == header
    assert data[12 + len(header):] == bytes([1, 0, 1, 0, 0, 1])


def test_complex_payload_is_interleaved():
    data = encode_container(np.array([[1 + 2j, complex(0.0, -0.5)]]), 'image')
    assert data.endswith(np.array([1.0, 2.0, 0.0, -0.5], dtype='<f8').tobytes())


@pytest.mark.parametrize('kind', ['image', 'kspace', 'matrix', 'mask'])
def test_write_read_is_bit_identical(tmp_path, rng, kind):
    if kind == 'mask':
        array = rng.random((5, 7)) < 0.5
    else:
        array = rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7))
    path = tmp_path / f'{kind}.bcs'
    write_container(path, array, kind)
    loaded = read_container(path, kind)
    assert loaded.tobytes() == array.tobytes()
    assert encode_container(loaded, kind) == path.read_bytes()


def test_real_images_are_stored_as_complex():
    kind, array = decode_container(encode_container(np.ones((2, 2)), 'image'))
    assert kind == 'image'
    assert array.dtype == np.complex128


def test_bad_magic():
    data = encode_container(np.ones((2, 2)), 'image')
    with pytest.raises(DataError):
        decode_container(b'XBCSCPX0' + data[8:])


def test_truncated_payload():
    data = encode_container(np.ones((2, 2)), 'image')
    with pytest.raises(DataError):
        decode_container(data[:-1])


def test_malformed_header():
    with pytest.raises(DataError):
        decode_container(MAGIC + (5).to_bytes(4, 'little') + b'{"dim' + bytes(16))


def test_unknown_kind():
    with pytest.raises(DataError):
        encode_container(np.ones((2, 2)), 'volume')
    with pytest.raises(DataError):
        encode_container(np.ones(4), 'image')


def test_kind_mismatch(tmp_path):
    path = tmp_path / 'mask.bcs'
    write_container(path, np.ones((2, 2), dtype=bool), 'mask')
    with pytest.raises(DataError):
        read_container(path, 'image')
