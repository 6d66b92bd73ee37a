"""File formats: the NBT1 binary tensor container and plain PGM frames.

NBT1 layout, all little-endian:

    bytes 0..3   magic "NBT1"
    bytes 4..7   rank as u32
    then         rank dims, each u32
    then         float32 values, row-major

Corrupt files raise distinct errors: ``BadMagicError`` for a wrong
magic, ``TruncatedTensorError`` for missing bytes, ``DimOverflowError``
for headers describing more data than the format allows. Values are
stored as float32; loading returns float32 arrays, so a save/load
round-trip is bit-exact for float32 data and casts anything wider.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"NBT1"
MAX_ELEMENTS = 1 << 28  # refuse absurd allocations from corrupt headers
_U32_MAX = 2**32 - 1


class TensorIOError(Exception):
    """Base class for tensor container errors."""


class BadMagicError(TensorIOError):
    pass


class TruncatedTensorError(TensorIOError):
    pass


class DimOverflowError(TensorIOError):
    pass


def save_tensor(path, array) -> None:
    array = np.asarray(array)
    if array.ndim < 1:
        array = array.reshape(1)
    total = 1
    for dim in array.shape:
        if dim > _U32_MAX:
            raise DimOverflowError(f"dimension {dim} does not fit in u32")
        total *= dim
    if total > MAX_ELEMENTS:
        raise DimOverflowError(f"{total} elements exceed the format limit")
    header = MAGIC + struct.pack("<I", array.ndim)
    header += struct.pack(f"<{array.ndim}I", *array.shape)
    payload = np.ascontiguousarray(array, dtype="<f4").tobytes()
    Path(path).write_bytes(header + payload)


def load_tensor(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagicError(f"{path}: not an NBT1 tensor")
    if len(data) < 8:
        raise TruncatedTensorError(f"{path}: header cut short")
    (rank,) = struct.unpack_from("<I", data, 4)
    offset = 8
    if len(data) < offset + 4 * rank:
        raise TruncatedTensorError(f"{path}: dimension list cut short")
    dims = struct.unpack_from(f"<{rank}I", data, offset)
    offset += 4 * rank
    total = 1
    for dim in dims:
        total *= int(dim)
        if total > MAX_ELEMENTS:
            raise DimOverflowError(f"{path}: header describes {dims} elements")
    expected = offset + 4 * total
    if len(data) < expected:
        raise TruncatedTensorError(f"{path}: payload cut short")
    if len(data) > expected:
        raise TensorIOError(f"{path}: trailing bytes after payload")
    values = np.frombuffer(data, dtype="<f4", count=total, offset=offset)
    return values.reshape(dims).copy()


def _to_gray(frame: np.ndarray) -> np.ndarray:
    # [-1, 1] -> [0, 255] with round-half-up; 0.0 maps to 128
    levels = np.floor((np.asarray(frame, dtype=np.float64) + 1.0) * 127.5 + 0.5)
    return np.clip(levels, 0, 255).astype(np.int64)


def export_frames(video: np.ndarray, out_dir) -> list[Path]:
    """Write each frame as a plain (ASCII P2) PGM file; returns the paths."""
    video = np.asarray(video)
    if video.ndim != 3:
        raise ValueError("video must be (frames, H, W)")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, frame in enumerate(video):
        gray = _to_gray(frame)
        h, w = gray.shape
        lines = [f"P2", f"{w} {h}", "255"]
        lines.extend(" ".join(str(v) for v in row) for row in gray)
        path = out_dir / f"frame_{i:04d}.pgm"
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    return paths
