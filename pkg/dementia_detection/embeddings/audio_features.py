"""
Per-sentence audio feature sequences, as produced offline by a frozen audio encoder.

AEMB layout (little-endian): magic b"AEMB", u32 version (1), u32 dim, u32 frame count T,
then T x dim float32 values, row major.
"""
import struct
from typing import Optional

import numpy as np

from dementia_detection.generic_tools.exceptions import AudioFeatureFormatError

AEMB_MAGIC = b"AEMB"
AEMB_VERSION = 1
_header = struct.Struct("<4sIII")


class AudioFeatureSequence:
    dim: int
    frames: np.ndarray
    sentence_key: Optional[str]

    def __init__(self, frames: np.ndarray, sentence_key: Optional[str] = None):
        frames = np.asarray(frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[0] < 1 or frames.shape[1] < 1:
            raise ValueError("audio frames must be a non empty T x dim matrix, got {}".format(frames.shape))
        if not np.all(np.isfinite(frames)):
            raise ValueError("audio frames must be finite")
        self.frames = frames
        self.frames.setflags(write=False)
        self.dim = frames.shape[1]
        self.sentence_key = sentence_key

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


def parse_audio_features(data: bytes, sentence_key: Optional[str] = None) -> AudioFeatureSequence:
    if len(data) < _header.size:
        raise AudioFeatureFormatError("truncated header ({} bytes)".format(len(data)))
    magic, version, dim, n_frames = _header.unpack_from(data, 0)
    if magic != AEMB_MAGIC:
        raise AudioFeatureFormatError("bad magic {!r}".format(magic))
    if version != AEMB_VERSION:
        raise AudioFeatureFormatError("unsupported version {}".format(version))
    if n_frames == 0:
        raise AudioFeatureFormatError("empty feature sequence")
    if dim == 0:
        raise AudioFeatureFormatError("zero feature dimension")
    expected = _header.size + 4 * dim * n_frames
    if len(data) != expected:
        raise AudioFeatureFormatError("payload length mismatch: {} bytes, expected {}".format(len(data),
                                                                                             expected))
    frames = np.frombuffer(data, dtype="<f4", count=dim * n_frames, offset=_header.size)
    frames = frames.astype(np.float64).reshape(n_frames, dim)
    if not np.all(np.isfinite(frames)):
        raise AudioFeatureFormatError("non finite feature value")
    return AudioFeatureSequence(frames=frames, sentence_key=sentence_key)


def load_audio_features(path: str, sentence_key: Optional[str] = None) -> AudioFeatureSequence:
    with open(path, "rb") as f:
        data = f.read()
    try:
        return parse_audio_features(data, sentence_key=sentence_key)
    except AudioFeatureFormatError as e:
        raise AudioFeatureFormatError("{}: {}".format(path, e))


def encode_audio_features(frames: np.ndarray) -> bytes:
    frames = np.asarray(frames)
    n_frames, dim = frames.shape
    return _header.pack(AEMB_MAGIC, AEMB_VERSION, dim, n_frames) + frames.astype("<f4").tobytes()


def save_audio_features(sequence: AudioFeatureSequence, path: str):
    with open(path, "wb") as f:
        f.write(encode_audio_features(sequence.frames))
