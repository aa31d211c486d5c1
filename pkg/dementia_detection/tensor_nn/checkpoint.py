"""
Checkpoint file layout, little-endian:

    b"DDCK", u32 version (1),
    u16 length + utf-8 model kind, u32 dim_w, u32 dim_a, i64 seed,
    u32 parameter count, then per parameter:
        u16 length + utf-8 name, u32 ndim, ndim x u32 dims, float64 data (row major).
"""
import struct
from collections import OrderedDict
from typing import Dict

import numpy as np

from dementia_detection.generic_tools.exceptions import CheckpointFormatError

CHECKPOINT_MAGIC = b"DDCK"
CHECKPOINT_VERSION = 1


class CheckpointData:
    kind: str
    dim_w: int
    dim_a: int
    seed: int
    params: Dict[str, np.ndarray]

    def __init__(self, kind: str, dim_w: int, dim_a: int, seed: int, params: Dict[str, np.ndarray]):
        self.kind = kind
        self.dim_w = dim_w
        self.dim_a = dim_a
        self.seed = seed
        self.params = params


def _pack_string(value: str) -> bytes:
    data = value.encode("utf-8")
    return struct.pack("<H", len(data)) + data


def encode_checkpoint(checkpoint: CheckpointData) -> bytes:
    chunks = [CHECKPOINT_MAGIC, struct.pack("<I", CHECKPOINT_VERSION), _pack_string(checkpoint.kind),
              struct.pack("<IIqI", checkpoint.dim_w, checkpoint.dim_a, checkpoint.seed, len(checkpoint.params))]
    for name, value in checkpoint.params.items():
        value = np.asarray(value, dtype=np.float64)
        chunks.append(_pack_string(name))
        chunks.append(struct.pack("<I", value.ndim))
        chunks.append(struct.pack("<{}I".format(value.ndim), *value.shape))
        chunks.append(value.astype("<f8").tobytes())
    return b"".join(chunks)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def read(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise CheckpointFormatError("truncated checkpoint at byte {}".format(self.pos))
        values = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return values

    def read_string(self) -> str:
        (length,) = self.read("<H")
        if self.pos + length > len(self.data):
            raise CheckpointFormatError("truncated checkpoint at byte {}".format(self.pos))
        raw = self.data[self.pos:self.pos + length]
        self.pos += length
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise CheckpointFormatError("invalid string at byte {}".format(self.pos - length))

    def read_array(self, shape) -> np.ndarray:
        count = int(np.prod(shape)) if len(shape) > 0 else 1
        if self.pos + 8 * count > len(self.data):
            raise CheckpointFormatError("truncated checkpoint at byte {}".format(self.pos))
        value = np.frombuffer(self.data, dtype="<f8", count=count, offset=self.pos).astype(np.float64)
        self.pos += 8 * count
        return value.reshape(shape)


def decode_checkpoint(data: bytes) -> CheckpointData:
    reader = _Reader(data)
    (magic,) = reader.read("<4s")
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointFormatError("bad magic {!r}".format(magic))
    (version,) = reader.read("<I")
    if version != CHECKPOINT_VERSION:
        raise CheckpointFormatError("unsupported checkpoint version {}".format(version))
    kind = reader.read_string()
    dim_w, dim_a, seed, n_params = reader.read("<IIqI")
    params = OrderedDict()
    for _ in range(n_params):
        name = reader.read_string()
        (ndim,) = reader.read("<I")
        shape = reader.read("<{}I".format(ndim))
        params[name] = reader.read_array(shape)
    if reader.pos != len(data):
        raise CheckpointFormatError("{} trailing bytes".format(len(data) - reader.pos))
    for name, value in params.items():
        if not np.all(np.isfinite(value)):
            raise CheckpointFormatError("non finite values in parameter {}".format(name))
    return CheckpointData(kind=kind, dim_w=dim_w, dim_a=dim_a, seed=seed, params=dict(params))


def save_checkpoint(checkpoint: CheckpointData, path: str):
    with open(path, "wb") as f:
        f.write(encode_checkpoint(checkpoint))


def load_checkpoint(path: str) -> CheckpointData:
    with open(path, "rb") as f:
        data = f.read()
    return decode_checkpoint(data)
