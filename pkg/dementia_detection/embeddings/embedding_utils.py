import logging
import os
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from dementia_detection.corpus.chat_model import SentenceRecord, Token
from dementia_detection.embeddings.audio_features import AudioFeatureSequence, load_audio_features
from dementia_detection.embeddings.word_embeddings import WordEmbeddingTable
from dementia_detection.generic_tools.exceptions import AudioFeatureFormatError, NoTimestampsError

logger = logging.getLogger(__name__)

AUDIO_FILE_SUFFIX = ".aemb"


class EmbeddedSentence:
    word_matrix: np.ndarray
    time_matrix: Optional[np.ndarray]
    audio: Optional[AudioFeatureSequence]
    label: int
    oov_mask: np.ndarray

    def __init__(self, word_matrix: np.ndarray, time_matrix: Optional[np.ndarray],
                 audio: Optional[AudioFeatureSequence], label: int, oov_mask: np.ndarray):
        self.word_matrix = word_matrix
        self.time_matrix = time_matrix
        self.audio = audio
        self.label = label
        self.oov_mask = oov_mask

    @property
    def length(self) -> int:
        return self.word_matrix.shape[0]

    @property
    def has_timestamps(self) -> bool:
        return self.time_matrix is not None


def embed_tokens(tokens: Sequence[str], table: WordEmbeddingTable) -> Tuple[np.ndarray, np.ndarray]:
    """Word vectors of the tokens; words missing from the table get a zero row and a true OOV flag."""
    word_matrix = np.zeros((len(tokens), table.dim), dtype=np.float64)
    oov_mask = np.zeros(len(tokens), dtype=bool)
    for i, t in enumerate(tokens):
        v = table.get(t)
        if v is None:
            oov_mask[i] = True
        else:
            word_matrix[i] = v
    return word_matrix, oov_mask


def normalize_timestamps(tokens: Sequence[Token]) -> np.ndarray:
    """(start, end) of each word in seconds, counted from the start of the first word."""
    if len(tokens) == 0:
        raise NoTimestampsError("no tokens")
    missing = [i for i, t in enumerate(tokens) if not t.has_timestamps]
    if len(missing) > 0:
        raise NoTimestampsError("words at positions {} have no timestamps".format(missing))
    origin = tokens[0].start_ms
    ms = np.array([[t.start_ms - origin, t.end_ms - origin] for t in tokens], dtype=np.float64)
    return np.round(ms / 1000., 3)


class FeatureStore:
    """
    Resolves the numeric inputs of sentence records and caches them.

    Audio lives in one directory per transcript, one <utterance index>.aemb file per sentence. Augmented
    records share transcript id and index with their parent, so they read the parent's audio.
    """
    table: WordEmbeddingTable
    audio_refs: Dict[str, Optional[str]]

    def __init__(self, table: WordEmbeddingTable, audio_refs: Optional[Dict[str, Optional[str]]] = None):
        self.table = table
        self.audio_refs = audio_refs if audio_refs is not None else {}
        self.audio_dim: Optional[int] = None
        self._sentences: Dict[str, EmbeddedSentence] = {}
        self._audio: Dict[str, Optional[AudioFeatureSequence]] = {}

    @property
    def word_dim(self) -> int:
        return self.table.dim

    def audio_path(self, record: SentenceRecord) -> Optional[str]:
        directory = self.audio_refs.get(record.transcript_id)
        if directory is None:
            return None
        return os.path.join(directory, "{}{}".format(record.index, AUDIO_FILE_SUFFIX))

    def add_audio(self, parent_id: str, sequence: AudioFeatureSequence):
        self._check_audio_dim(sequence, parent_id)
        self._audio[parent_id] = sequence

    def _check_audio_dim(self, sequence: AudioFeatureSequence, key: str):
        if self.audio_dim is None:
            self.audio_dim = sequence.dim
        elif sequence.dim != self.audio_dim:
            raise AudioFeatureFormatError("{}: feature dimension {} differs from {}".format(
                key, sequence.dim, self.audio_dim))

    def audio_for(self, record: SentenceRecord) -> Optional[AudioFeatureSequence]:
        key = record.parent_id
        if key not in self._audio:
            path = self.audio_path(record)
            if path is None or not os.path.exists(path):
                self._audio[key] = None
            else:
                sequence = load_audio_features(path, sentence_key=key)
                self._check_audio_dim(sequence, path)
                self._audio[key] = sequence
        return self._audio[key]

    def has_audio(self, record: SentenceRecord) -> bool:
        return self.audio_for(record) is not None

    def embed(self, record: SentenceRecord) -> EmbeddedSentence:
        key = record.record_id
        if key not in self._sentences:
            word_matrix, oov_mask = embed_tokens(record.words, self.table)
            time_matrix = normalize_timestamps(record.tokens) if record.has_timestamps else None
            self._sentences[key] = EmbeddedSentence(word_matrix=word_matrix,
                                                    time_matrix=time_matrix,
                                                    audio=self.audio_for(record),
                                                    label=record.binary_label,
                                                    oov_mask=oov_mask)
        return self._sentences[key]

    def oov_rate(self, records: Sequence[SentenceRecord]) -> float:
        n_words = sum(len(r.tokens) for r in records)
        if n_words == 0:
            return 0.
        return sum(int(self.embed(r).oov_mask.sum()) for r in records) / n_words
