import logging
from typing import List, Optional, Sequence

import numpy as np

from dementia_detection.corpus.chat_model import SentenceRecord
from dementia_detection.embeddings.embedding_utils import FeatureStore
from dementia_detection.generic_tools.exceptions import MissingChannelError

logger = logging.getLogger(__name__)

DEFAULT_BATCH_SIZE = 16


class Batch:
    """
    Padded inputs of B sentences. Padding is trailing, zero filled and false in the masks.
    time_input and audio_input are None when the batch was built without those channels.
    """
    word_input: np.ndarray
    time_input: Optional[np.ndarray]
    audio_input: Optional[np.ndarray]
    seq_mask: np.ndarray
    audio_mask: Optional[np.ndarray]
    labels: np.ndarray
    record_ids: List[str]

    def __init__(self, word_input: np.ndarray, time_input: Optional[np.ndarray],
                 audio_input: Optional[np.ndarray], seq_mask: np.ndarray, audio_mask: Optional[np.ndarray],
                 labels: np.ndarray, record_ids: List[str]):
        self.word_input = word_input
        self.time_input = time_input
        self.audio_input = audio_input
        self.seq_mask = seq_mask
        self.audio_mask = audio_mask
        self.labels = labels
        self.record_ids = record_ids

    @property
    def size(self) -> int:
        return self.labels.shape[0]


def pad_sequences(matrices: Sequence[np.ndarray], dim: int, min_length: int = 1):
    length = max([min_length] + [m.shape[0] for m in matrices])
    padded = np.zeros((len(matrices), length, dim), dtype=np.float64)
    mask = np.zeros((len(matrices), length), dtype=bool)
    for i, m in enumerate(matrices):
        padded[i, :m.shape[0]] = m
        mask[i, :m.shape[0]] = True
    return padded, mask


def check_channels(records: Sequence[SentenceRecord], store: FeatureStore,
                   need_audio: bool = False, need_time: bool = False):
    if need_time:
        missing = [r.record_id for r in records if not r.has_timestamps]
        if len(missing) > 0:
            raise MissingChannelError("sentences without word timestamps", missing)
    if need_audio:
        missing = [r.record_id for r in records if not store.has_audio(r)]
        if len(missing) > 0:
            raise MissingChannelError("sentences without audio features", missing)


def build_batch(records: Sequence[SentenceRecord], store: FeatureStore,
                need_audio: bool = False, need_time: bool = False) -> Batch:
    embedded = [store.embed(r) for r in records]
    word_input, seq_mask = pad_sequences([e.word_matrix for e in embedded], store.word_dim)
    time_input = None
    if need_time:
        time_input, _ = pad_sequences([e.time_matrix for e in embedded], 2, min_length=word_input.shape[1])
    audio_input, audio_mask = None, None
    if need_audio:
        audio_input, audio_mask = pad_sequences([e.audio.frames for e in embedded], store.audio_dim)
    return Batch(word_input=word_input, time_input=time_input, audio_input=audio_input, seq_mask=seq_mask,
                 audio_mask=audio_mask, labels=np.array([e.label for e in embedded], dtype=np.float64),
                 record_ids=[r.record_id for r in records])


def make_batches(records: Sequence[SentenceRecord],
                 store: FeatureStore,
                 batch_size: int = DEFAULT_BATCH_SIZE,
                 shuffle_seed: Optional[int] = None,
                 epoch: int = 0,
                 need_audio: bool = False,
                 need_time: bool = False) -> List[Batch]:
    """
    Consecutive batches of batch_size records (the last one may be smaller). With a shuffle_seed the
    order is permuted by a generator keyed on (shuffle_seed, epoch), otherwise input order is kept.
    """
    check_channels(records, store, need_audio=need_audio, need_time=need_time)
    order = np.arange(len(records))
    if shuffle_seed is not None:
        order = np.random.default_rng([shuffle_seed, epoch]).permutation(len(records))
    batches = []
    for start in range(0, len(records), batch_size):
        chunk = [records[i] for i in order[start:start + batch_size]]
        batches.append(build_batch(chunk, store, need_audio=need_audio, need_time=need_time))
    logger.debug("%d records in %d batches", len(records), len(batches))
    return batches
