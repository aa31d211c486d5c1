"""
Frozen word vectors read from word2vec files.

binary: header "V D\\n" then V records: word, one space, D little-endian float32 (a newline between
records is tolerated). text: one line "word f1 ... fD" per word, with an optional "V D" first line.
Vectors are held as float64.
"""
import logging
from enum import Enum
from typing import Dict, List, Optional

import numpy as np

from dementia_detection.generic_tools.exceptions import ConfigError, EmbeddingFormatError

logger = logging.getLogger(__name__)


class EmbeddingFormat(Enum):
    BINARY = 0
    TEXT = 1

    @staticmethod
    def from_string(value: str) -> "EmbeddingFormat":
        formats = {"binary": EmbeddingFormat.BINARY, "bin": EmbeddingFormat.BINARY,
                   "text": EmbeddingFormat.TEXT, "txt": EmbeddingFormat.TEXT}
        key = value.strip().lower()
        if key not in formats:
            raise ConfigError("embedding_format", "'{}' is not one of binary, text".format(value))
        return formats[key]


class WordEmbeddingTable:
    dim: int
    vocab: Dict[str, int]
    vectors: np.ndarray

    def __init__(self, dim: int, vocab: Dict[str, int], vectors: np.ndarray):
        if dim <= 0:
            raise ValueError("embedding dimension must be positive")
        if vectors.ndim != 2 or vectors.shape[1] != dim:
            raise ValueError("vectors shape {} does not match dim {}".format(vectors.shape, dim))
        if any(i >= vectors.shape[0] for i in vocab.values()):
            raise ValueError("vocabulary index out of range")
        self.dim = dim
        self.vocab = vocab
        self.vectors = vectors
        self.vectors.setflags(write=False)

    def __len__(self):
        return len(self.vocab)

    def __contains__(self, word: str):
        return word in self.vocab

    def get(self, word: str) -> Optional[np.ndarray]:
        i = self.vocab.get(word)
        if i is None:
            return None
        return self.vectors[i]

    def words(self) -> List[str]:
        return sorted(self.vocab, key=self.vocab.get)

    @staticmethod
    def from_dict(vectors: Dict[str, np.ndarray]) -> "WordEmbeddingTable":
        words = list(vectors)
        matrix = np.array([np.asarray(vectors[w], dtype=np.float64) for w in words], dtype=np.float64)
        if matrix.ndim != 2:
            raise ValueError("all vectors must share one dimension")
        return WordEmbeddingTable(dim=matrix.shape[1], vocab={w: i for i, w in enumerate(words)},
                                  vectors=matrix)


class _TableBuilder:
    def __init__(self, dim: int):
        self.dim = dim
        self.vocab: Dict[str, int] = {}
        self.rows: List[np.ndarray] = []
        self.duplicates = 0

    def add(self, word: str, vector: np.ndarray):
        if word in self.vocab:
            self.duplicates += 1
            self.rows[self.vocab[word]] = vector
        else:
            self.vocab[word] = len(self.rows)
            self.rows.append(vector)

    def build(self, path: str) -> WordEmbeddingTable:
        if self.duplicates > 0:
            logger.warning("%s: %d duplicate words, the last vector was kept", path, self.duplicates)
        matrix = np.array(self.rows, dtype=np.float64).reshape(len(self.rows), self.dim)
        return WordEmbeddingTable(dim=self.dim, vocab=self.vocab, vectors=matrix)


def _parse_binary(data: bytes, path: str) -> WordEmbeddingTable:
    end_header = data.find(b"\n")
    if end_header < 0:
        raise EmbeddingFormatError(0, "missing 'V D' header line")
    try:
        n_words, dim = [int(x) for x in data[:end_header].split()]
    except ValueError:
        raise EmbeddingFormatError(0, "malformed header {!r}".format(data[:end_header][:40]))
    if n_words < 0 or dim <= 0:
        raise EmbeddingFormatError(0, "header declares {} words of dimension {}".format(n_words, dim))
    builder = _TableBuilder(dim)
    record_bytes = 4 * dim
    pos = end_header + 1
    for _ in range(n_words):
        while pos < len(data) and data[pos:pos + 1] == b"\n":
            pos += 1
        space = data.find(b" ", pos)
        if space < 0:
            raise EmbeddingFormatError(pos, "truncated file, word expected")
        try:
            word = data[pos:space].decode("utf-8")
        except UnicodeDecodeError:
            raise EmbeddingFormatError(pos, "word is not valid UTF-8")
        if len(word) == 0:
            raise EmbeddingFormatError(pos, "empty word")
        pos = space + 1
        if pos + record_bytes > len(data):
            raise EmbeddingFormatError(pos, "truncated file, {} floats expected".format(dim))
        vector = np.frombuffer(data, dtype="<f4", count=dim, offset=pos).astype(np.float64)
        if not np.all(np.isfinite(vector)):
            raise EmbeddingFormatError(pos, "non finite value in vector of '{}'".format(word))
        builder.add(word, vector)
        pos += record_bytes
    return builder.build(path)


def _parse_text(data: bytes, path: str) -> WordEmbeddingTable:
    builder: Optional[_TableBuilder] = None
    declared_words = None
    offset = 0
    n_rows = 0
    for i, raw_line in enumerate(data.split(b"\n")):
        line_offset = offset
        offset += len(raw_line) + 1
        try:
            line = raw_line.decode("utf-8").strip()
        except UnicodeDecodeError:
            raise EmbeddingFormatError(line_offset, "line is not valid UTF-8")
        if len(line) == 0:
            continue
        fields = line.split()
        if i == 0 and len(fields) == 2 and fields[0].isdigit() and fields[1].isdigit():
            declared_words = int(fields[0])
            builder = _TableBuilder(int(fields[1]))
            continue
        if builder is None:
            builder = _TableBuilder(len(fields) - 1)
            if builder.dim <= 0:
                raise EmbeddingFormatError(line_offset, "row without values")
        if len(fields) - 1 != builder.dim:
            raise EmbeddingFormatError(line_offset, "expected {} values for '{}', found {}".format(
                builder.dim, fields[0], len(fields) - 1))
        try:
            vector = np.array([float(x) for x in fields[1:]], dtype=np.float64)
        except ValueError:
            raise EmbeddingFormatError(line_offset, "non numeric value in row of '{}'".format(fields[0]))
        if not np.all(np.isfinite(vector)):
            raise EmbeddingFormatError(line_offset, "non finite value in vector of '{}'".format(fields[0]))
        builder.add(fields[0], vector)
        n_rows += 1
    if builder is None:
        raise EmbeddingFormatError(0, "empty embedding file")
    if declared_words is not None and n_rows != declared_words:
        raise EmbeddingFormatError(len(data), "truncated file, {} rows declared, {} found".format(
            declared_words, n_rows))
    return builder.build(path)


def load_word_embeddings(path: str, format: EmbeddingFormat = EmbeddingFormat.BINARY) -> WordEmbeddingTable:
    with open(path, "rb") as f:
        data = f.read()
    if format == EmbeddingFormat.BINARY:
        table = _parse_binary(data, path)
    else:
        table = _parse_text(data, path)
    logger.info("loaded %d word vectors of dimension %d from %s", len(table), table.dim, path)
    return table


def save_word_embeddings(table: WordEmbeddingTable, path: str,
                         format: EmbeddingFormat = EmbeddingFormat.BINARY):
    words = table.words()
    if format == EmbeddingFormat.BINARY:
        with open(path, "wb") as f:
            f.write("{} {}\n".format(len(words), table.dim).encode("utf-8"))
            for w in words:
                f.write(w.encode("utf-8") + b" ")
                f.write(np.asarray(table.get(w), dtype="<f4").tobytes())
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for w in words:
                values = np.asarray(table.get(w), dtype=np.float32)
                f.write(w + " " + " ".join(repr(float(v)) for v in values) + "\n")
