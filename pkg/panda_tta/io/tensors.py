"""TNS1 tensors and binary PPM images.

TNS1 layout (little endian)::

    b"TNS1" | u32 H | u32 W | u32 C | H*W*C float32, row-major (row, col, channel)

Matrices such as text banks are stored with ``H = rows``, ``W = cols``,
``C = 1``.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from panda_tta.core import ParseError
from panda_tta.nda import ImageTensor

MAGIC = b"TNS1"
HEADER = struct.Struct("<4sIII")
PPM_MAGIC = b"P6"


def encode_tns(data: np.ndarray) -> bytes:
    arr = np.asarray(data)
    if arr.ndim == 2:
        arr = arr[..., None]
    if arr.ndim != 3:
        raise ParseError(f"TNS1 holds 3-D (H, W, C) tensors, got shape {arr.shape}")
    h, w, c = arr.shape
    return HEADER.pack(MAGIC, h, w, c) + np.ascontiguousarray(arr, dtype="<f4").tobytes()


def decode_tns(blob: bytes, *, source: str = "<bytes>") -> np.ndarray:
    if len(blob) < HEADER.size:
        raise ParseError(f"{source}: too short for a TNS1 header ({len(blob)} bytes)")
    magic, h, w, c = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ParseError(f"{source}: bad magic {magic!r}, expected {MAGIC!r}")
    expected = HEADER.size + 4 * h * w * c
    if len(blob) != expected:
        raise ParseError(f"{source}: header declares {h}x{w}x{c} floats ({expected} bytes) but the file has {len(blob)}")
    values = np.frombuffer(blob, dtype="<f4", offset=HEADER.size)
    return values.reshape(h, w, c).astype(np.float64)


def _ppm_tokens(blob: bytes, count: int, source: str) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < count:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace() and blob[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ParseError(f"{source}: truncated PPM header")
        tokens.append(blob[start:pos])
    # exactly one whitespace byte separates the header from the raster
    return tokens, pos + 1


def decode_ppm(blob: bytes, *, source: str = "<bytes>") -> np.ndarray:
    """Binary P6 with 8-bit samples, scaled to float in ``[0, 1]``."""
    tokens, offset = _ppm_tokens(blob, 4, source)
    if tokens[0] != PPM_MAGIC:
        raise ParseError(f"{source}: not a binary PPM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise ParseError(f"{source}: non-numeric PPM header field") from exc
    if width <= 0 or height <= 0 or not 0 < maxval < 256:
        raise ParseError(f"{source}: unsupported PPM {width}x{height} maxval {maxval} (8-bit only)")
    raster = blob[offset : offset + width * height * 3]
    if len(raster) != width * height * 3:
        raise ParseError(f"{source}: PPM raster is truncated")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)
    return pixels.astype(np.float64) / float(maxval)


def read_image(path: os.PathLike | str) -> ImageTensor:
    """Load a TNS1 or P6 PPM file, chosen by its magic bytes."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from exc
    if blob.startswith(MAGIC):
        return ImageTensor(decode_tns(blob, source=str(path)))
    if blob.startswith(PPM_MAGIC):
        return ImageTensor(decode_ppm(blob, source=str(path)))
    raise ParseError(f"{path}: neither TNS1 nor binary PPM")


def write_tns(path: os.PathLike | str, data: np.ndarray | ImageTensor) -> Path:
    path = Path(path)
    arr = data.data if isinstance(data, ImageTensor) else data
    path.write_bytes(encode_tns(arr))
    return path


def read_matrix(path: os.PathLike | str) -> np.ndarray:
    """Load a TNS1 matrix stored with ``C = 1``."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from exc
    arr = decode_tns(blob, source=str(path))
    if arr.shape[2] != 1:
        raise ParseError(f"{path}: expected a matrix (C = 1), got C = {arr.shape[2]}")
    return arr[..., 0]
