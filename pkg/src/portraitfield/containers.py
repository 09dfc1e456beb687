"""Binary tensor container: magic "DNPT", rank u32, dims u32[], f32 LE data."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import CheckpointError

TENSOR_MAGIC = b"DNPT"


def write_tensor(path, array: np.ndarray) -> None:
    arr = np.ascontiguousarray(array, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(TENSOR_MAGIC)
        fh.write(struct.pack("<I", arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        fh.write(arr.tobytes())


def read_tensor(path) -> np.ndarray:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read tensor container {path}: {e}") from e
    if len(blob) < 8 or blob[:4] != TENSOR_MAGIC:
        raise CheckpointError(f"{path}: not a tensor container (bad magic)")
    (rank,) = struct.unpack_from("<I", blob, 4)
    header_end = 8 + 4 * rank
    if rank > 8 or len(blob) < header_end:
        raise CheckpointError(f"{path}: truncated tensor header")
    dims = struct.unpack_from(f"<{rank}I", blob, 8)
    count = int(np.prod(dims)) if rank else 1
    expected = header_end + 4 * count
    if len(blob) != expected:
        raise CheckpointError(
            f"{path}: payload is {len(blob) - header_end} bytes, header promises {4 * count}"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=header_end, count=count)
    return data.reshape(dims).astype(np.float32)
