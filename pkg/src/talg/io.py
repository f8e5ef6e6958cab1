"""Dataset loading and the dense-array file format.

RawTensorFile layout (all header integers little-endian)::

    b"TALG1"  magic
    u8        endianness of the payload (0 little, 1 big)
    u8        scalar kind (0 float64, 1 complex128 interleaved)
    u32       order
    u32[order] dims (t-scalar modes first)
    payload   row-major, last index fastest
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError

MAGIC = b"TALG1"
_KINDS = {0: np.float64, 1: np.complex128}

CIFAR_RECORD = 1 + 3 * 32 * 32


def write_raw(path, array):
    """Write ``array`` as a RawTensorFile; complex data keeps its imaginary part."""
    array = np.asarray(array)
    kind = 1 if np.iscomplexobj(array) else 0
    payload = np.ascontiguousarray(array, dtype=np.dtype(_KINDS[kind]).newbyteorder("<"))
    header = MAGIC + struct.pack("<BBI", 0, kind, array.ndim) + struct.pack(f"<{array.ndim}I", *array.shape)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes(order="C"))


def parse_raw(buf):
    """Decode RawTensorFile bytes; validates the header and exact payload length."""
    buf = memoryview(buf)
    if len(buf) < len(MAGIC) or bytes(buf[: len(MAGIC)]) != MAGIC:
        raise DataError("bad magic, not a TALG1 file", 0)
    pos = len(MAGIC)
    if len(buf) < pos + 6:
        raise DataError("truncated header", len(buf))
    endian, kind, order = struct.unpack_from("<BBI", buf, pos)
    if endian not in (0, 1):
        raise DataError(f"invalid endianness flag {endian}", pos)
    if kind not in _KINDS:
        raise DataError(f"invalid scalar kind {kind}", pos + 1)
    pos += 6
    if len(buf) < pos + 4 * order:
        raise DataError(f"truncated dims for order {order}", len(buf))
    dims = struct.unpack_from(f"<{order}I", buf, pos)
    pos += 4 * order
    dtype = np.dtype(_KINDS[kind]).newbyteorder("<" if endian == 0 else ">")
    expected = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
    have = len(buf) - pos
    if have != expected:
        raise DataError(f"payload has {have} bytes, dims {tuple(dims)} need {expected}", pos + min(have, expected))
    arr = np.frombuffer(buf, dtype=dtype, offset=pos, count=expected // dtype.itemsize)
    return arr.astype(dtype.newbyteorder("=")).reshape(dims)


def read_raw(path):
    return parse_raw(Path(path).read_bytes())


def parse_cifar10(buf, limit=None):
    """Decode CIFAR-10 binary records into ``(images (n, 3, 32, 32) uint8, labels (n,))``."""
    n, rest = divmod(len(buf), CIFAR_RECORD)
    if rest:
        raise DataError(f"size {len(buf)} is not a multiple of the {CIFAR_RECORD}-byte record", n * CIFAR_RECORD)
    if limit is not None:
        n = min(n, int(limit))
    recs = np.frombuffer(buf, dtype=np.uint8, count=n * CIFAR_RECORD).reshape(n, CIFAR_RECORD)
    labels = recs[:, 0].copy()
    bad = np.flatnonzero(labels > 9)
    if bad.size:
        raise DataError(f"label {labels[bad[0]]} out of range", int(bad[0]) * CIFAR_RECORD)
    return recs[:, 1:].reshape(n, 3, 32, 32).copy(), labels


def load_cifar10(paths, limit=None):
    """Load one or more CIFAR-10 batch files in order, stopping after ``limit`` images."""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    images, labels = [], []
    left = limit
    for p in paths:
        if left is not None and left <= 0:
            break
        im, lb = parse_cifar10(Path(p).read_bytes(), left)
        images.append(im)
        labels.append(lb)
        if left is not None:
            left -= len(lb)
    if not images:
        raise ConfigError("no CIFAR-10 batch files given")
    return np.concatenate(images), np.concatenate(labels)


def load_image(path):
    """Read a PNG/PGM image; returns ``(array, bit_depth)``. Color images are ``(H, W, C)``."""
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            arr = np.asarray(im)
    except (UnidentifiedImageError, OSError) as exc:
        raise DataError(f"cannot decode image {path}: {exc}") from None
    if mode in ("P", "1", "LA", "RGBA"):
        with Image.open(path) as im:
            arr = np.asarray(im.convert("RGB" if mode == "RGBA" else "L"))
    depth = 16 if mode.startswith("I") or arr.dtype == np.uint16 else 8
    return arr.astype(float), depth


def save_image(path, array, bit_depth=8):
    from PIL import Image

    top = 2 ** bit_depth - 1
    arr = np.clip(np.rint(np.asarray(array, dtype=float)), 0, top)
    arr = arr.astype(np.uint8 if bit_depth == 8 else np.uint16)
    Image.fromarray(arr).save(path)


def load_any(path, kind=None):
    """Load ``path`` as ``(array, default_psnr_max)`` by kind or suffix."""
    path = Path(path)
    kind = kind or {".png": "png", ".pgm": "pgm", ".talg": "raw-tensor", ".bin": "cifar10-bin"}.get(
        path.suffix.lower())
    if kind in ("png", "pgm"):
        arr, depth = load_image(path)
        return arr, float(2 ** depth - 1)
    if kind == "raw-tensor":
        arr = read_raw(path)
        return arr, float(np.abs(arr).max(initial=0.0)) or 1.0
    raise ConfigError(f"cannot infer dataset kind of {path}; pass --kind")


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
