"""Binary tensor containers used by the preprocessing and training stages.

A tensor block is a sequence of float64 arrays with explicit shape
prefixes, all little-endian:

    magic  b"QWG1"
    count  int64
    then per tensor: ndim int64, dims int64 × ndim, data float64 (C order)

Grid and Q-cache files are bare tensor blocks.  Checkpoints prepend one
UTF-8 JSON line (version, architecture, seeds) before the block, so a
file can be identified and validated without decoding any floats.
"""

from __future__ import annotations

import json

import numpy as np

MAGIC = b"QWG1"
CHECKPOINT_VERSION = 1


def _block_bytes(tensors: list[np.ndarray]) -> bytes:
    parts = [MAGIC, np.int64(len(tensors)).astype("<i8").tobytes()]
    for tensor in tensors:
        arr = np.ascontiguousarray(tensor, dtype="<f8")
        header = np.array([arr.ndim, *arr.shape], dtype="<i8")
        parts.append(header.tobytes())
        parts.append(arr.tobytes())
    return b"".join(parts)


def _parse_block(buf: bytes, path: str) -> list[np.ndarray]:
    if buf[:4] != MAGIC:
        raise ValueError(f"{path}: not a tensor block (bad magic)")
    offset = 4

    def take_ints(k: int) -> np.ndarray:
        nonlocal offset
        out = np.frombuffer(buf, dtype="<i8", count=k, offset=offset)
        offset += 8 * k
        return out

    (count,) = take_ints(1)
    tensors = []
    for _ in range(count):
        (ndim,) = take_ints(1)
        shape = tuple(take_ints(int(ndim)))
        size = int(np.prod(shape)) if shape else 1
        data = np.frombuffer(buf, dtype="<f8", count=size, offset=offset)
        offset += 8 * size
        tensors.append(data.reshape(shape).copy())
    if offset != len(buf):
        raise ValueError(f"{path}: {len(buf) - offset} trailing bytes")
    return tensors


def write_tensors(path: str, tensors: list[np.ndarray]) -> None:
    with open(path, "wb") as fh:
        fh.write(_block_bytes(tensors))


def read_tensors(path: str) -> list[np.ndarray]:
    with open(path, "rb") as fh:
        buf = fh.read()
    return _parse_block(buf, path)


def write_checkpoint(path: str, header: dict, tensors: list[np.ndarray]) -> None:
    """JSON header line + tensor block.  Adds a ``version`` field."""
    payload = {"version": CHECKPOINT_VERSION, **header}
    line = json.dumps(payload, sort_keys=True).encode("utf-8") + b"\n"
    with open(path, "wb") as fh:
        fh.write(line)
        fh.write(_block_bytes(tensors))


def read_checkpoint(path: str) -> tuple[dict, list[np.ndarray]]:
    with open(path, "rb") as fh:
        line = fh.readline()
        buf = fh.read()
    try:
        header = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise ValueError(f"{path}: malformed checkpoint header") from None
    if header.get("version") != CHECKPOINT_VERSION:
        raise ValueError(
            f"{path}: unsupported checkpoint version {header.get('version')!r}"
        )
    return header, _parse_block(buf, path)
