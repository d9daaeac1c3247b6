"""Binary window cache.

Layout (all integers little-endian)::

    offset  size  field
    0       8     magic b"BFREEWIN"
    8       4     uint32 format version (1)
    12      4     uint32 reserved, 0
    16      32    SHA-256 digest of the canonical run configuration
    48      4     uint32 d (box dimension)
    52      4     int32 truncation L (-1 when absent)
    56      8*d   int64 box lower corner
    ..      8*d   int64 box side lengths
    ..      8     uint64 number of bits (box size)
    ..      ...   bits packed 8 per byte, least significant bit first
"""
from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .errors import CacheMismatch
from .geometry import Box
from .sieve_measure import Window

MAGIC = b"BFREEWIN"
VERSION = 1


def encode_window(window: Window, config_hash: bytes) -> bytes:
    if len(config_hash) != 32:
        raise ValueError("config hash must be a 32-byte digest")
    d = window.box.dim
    L = -1 if window.L is None else window.L
    parts = [
        MAGIC,
        struct.pack("<II", VERSION, 0),
        config_hash,
        struct.pack("<Ii", d, L),
        struct.pack(f"<{d}q", *window.box.lo),
        struct.pack(f"<{d}q", *window.box.shape),
        struct.pack("<Q", window.box.size),
        np.packbits(window.bits.astype(np.uint8), bitorder="little").tobytes(),
    ]
    return b"".join(parts)


def decode_window(data: bytes, expected_hash: bytes | None = None) -> tuple[Window, bytes]:
    if data[:8] != MAGIC:
        raise CacheMismatch("not a window cache file")
    version, _ = struct.unpack_from("<II", data, 8)
    if version != VERSION:
        raise CacheMismatch(f"unsupported cache version {version}")
    digest = data[16:48]
    if expected_hash is not None and digest != expected_hash:
        raise CacheMismatch("cache was produced by a different configuration")
    d, L = struct.unpack_from("<Ii", data, 48)
    pos = 56
    lo = struct.unpack_from(f"<{d}q", data, pos)
    pos += 8 * d
    shape = struct.unpack_from(f"<{d}q", data, pos)
    pos += 8 * d
    (nbits,) = struct.unpack_from("<Q", data, pos)
    pos += 8
    box = Box(tuple(lo), tuple(shape))
    if nbits != box.size or len(data) - pos != (nbits + 7) // 8:
        raise CacheMismatch("cache payload length does not match its box")
    bits = np.unpackbits(np.frombuffer(data, np.uint8, offset=pos), count=nbits, bitorder="little")
    return Window(box, bits.astype(np.uint8), None, None if L < 0 else L), digest


def atomic_write(path: str, data: bytes) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_window(path: str, window: Window, config_hash: bytes) -> None:
    atomic_write(path, encode_window(window, config_hash))


def load_window(path: str, expected_hash: bytes | None = None) -> Window:
    with open(path, "rb") as fh:
        return decode_window(fh.read(), expected_hash)[0]
