"""
Binary container for images, k-space, masks and transforms

Layout:
    magic       8 bytes  b"XBCSCPX1"
    header_len  u32 little-endian
    header      UTF-8 JSON {"dims": [h, w], "dtype": "c128"|"u8", "kind": ...}
    payload     row-major; c128 = interleaved little-endian float64 (re, im),
                u8 = one byte per mask entry
"""

import json

import numpy as np

from errors import DataError

MAGIC = b"XBCSCPX1"
KINDS = ('image', 'kspace', 'mask', 'matrix')
DTYPES = {'c128': np.dtype('<c16'), 'u8': np.dtype('u1')}


def encode_container(array: np.ndarray, kind: str) -> bytes:
    """
    Serialize a 2D array.

    Args:
        array: Complex array, or boolean array for kind 'mask'
        kind: One of KINDS

    Returns:
        Container bytes
    """
    if kind not in KINDS:
        raise DataError(f"Unknown container kind {kind!r}, expected one of {KINDS}")
    array = np.asarray(array)
    if array.ndim != 2:
        raise DataError(f"Containers hold 2D arrays, got shape {array.shape}")
    dtype = 'u8' if kind == 'mask' else 'c128'
    header = json.dumps({'kind': kind, 'dims': list(array.shape), 'dtype': dtype},
                        sort_keys=True, separators=(',', ':')).encode('utf-8')
    payload = np.ascontiguousarray(array.astype(DTYPES[dtype])).tobytes()
    return MAGIC + len(header).to_bytes(4, 'little') + header + payload


def decode_container(data: bytes) -> tuple:
    """
    Parse container bytes.

    Returns:
        (kind, array); masks decode to bool, everything else to complex128

    Raises:
        DataError: On a malformed container.
    """
    if data[:8] != MAGIC:
        raise DataError(f"Bad magic {data[:8]!r}, expected {MAGIC!r}")
    if len(data) < 12:
        raise DataError("Truncated container header")
    header_len = int.from_bytes(data[8:12], 'little')
    try:
        header = json.loads(data[12:12 + header_len].decode('utf-8'))
        kind, dims, dtype = header['kind'], [int(d) for d in header['dims']], header['dtype']
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise DataError(f"Malformed container header: {e}") from e
    if kind not in KINDS or dtype not in DTYPES or len(dims) != 2 or min(dims) < 0:
        raise DataError(f"Unsupported container header {header}")

    payload = data[12 + header_len:]
    expected = dims[0] * dims[1] * DTYPES[dtype].itemsize
    if len(payload) != expected:
        raise DataError(f"Payload holds {len(payload)} bytes, header implies {expected}")
    array = np.frombuffer(payload, dtype=DTYPES[dtype]).reshape(dims)
    if dtype == 'u8':
        return kind, array.astype(bool)
    return kind, array.astype(np.complex128)


def write_container(path: str, array: np.ndarray, kind: str) -> None:
    with open(path, 'wb') as f:
        f.write(encode_container(array, kind))


def read_container(path: str, kind: str = None) -> np.ndarray:
    """
    Load a container, optionally checking its kind.

    Raises:
        DataError: On a malformed file or a kind mismatch.
    """
    with open(path, 'rb') as f:
        found, array = decode_container(f.read())
    if kind is not None and found != kind:
        raise DataError(f"{path}: expected a {kind} container, found {found}")
    return array
