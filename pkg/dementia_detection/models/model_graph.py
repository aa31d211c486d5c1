"""
The six classifiers. Every one ends with a single sigmoid unit.

    audio            audio frames -> mean pool -> dropout -> dense
    text             words -> lstm -> dense
    text+time        [words, word times] -> lstm -> dense
    audio+time       [word times -> lstm, audio -> mean pool -> dropout] -> dense
    audio+text       [words -> lstm, audio -> mean pool -> dropout] -> dense
    audio+text+time  [[words, word times] -> lstm, audio -> mean pool -> dropout] -> dense
"""
import logging
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from dementia_detection.dataset.batching import Batch
from dementia_detection.generic_tools.exceptions import CheckpointFormatError, MissingChannelError, \
    StaleCacheError, UsageError
from dementia_detection.tensor_nn.checkpoint import CheckpointData, load_checkpoint, save_checkpoint
from dementia_detection.tensor_nn.initializers import init_dense, init_lstm
from dementia_detection.tensor_nn.layers import Activation, DenseParams, LstmParams, concat, concat_backward, \
    dense_backward, dense_forward, dropout, dropout_backward, lstm_backward, lstm_forward, mean_pool_time, \
    mean_pool_time_backward
from dementia_detection.tensor_nn.losses import bce_loss
from dementia_detection.tensor_nn.optimizer import TrainState, adam_step

logger = logging.getLogger(__name__)

LSTM_UNITS = 16
DROPOUT_RATE = 0.2
TIME_FEATURES = 2


class ModelKind(Enum):
    AUDIO = 0
    TEXT = 1
    AUDIO_TIME = 2
    TEXT_TIME = 3
    AUDIO_TEXT = 4
    AUDIO_TEXT_TIME = 5

    @property
    def uses_audio(self) -> bool:
        return self in {ModelKind.AUDIO, ModelKind.AUDIO_TIME, ModelKind.AUDIO_TEXT, ModelKind.AUDIO_TEXT_TIME}

    @property
    def uses_text(self) -> bool:
        return self in {ModelKind.TEXT, ModelKind.TEXT_TIME, ModelKind.AUDIO_TEXT, ModelKind.AUDIO_TEXT_TIME}

    @property
    def uses_time(self) -> bool:
        return self in {ModelKind.AUDIO_TIME, ModelKind.TEXT_TIME, ModelKind.AUDIO_TEXT_TIME}

    @property
    def has_lstm(self) -> bool:
        return self.uses_text or self.uses_time

    @property
    def cli_name(self) -> str:
        return self.name.lower().replace("_", "+")

    @property
    def display_name(self) -> str:
        return "+".join(part.capitalize() for part in self.name.split("_"))

    @staticmethod
    def from_string(value: str) -> "ModelKind":
        key = value.strip().lower()
        for kind in ModelKind:
            if key in {kind.cli_name, kind.name.lower(), kind.display_name.lower().replace("+", "")}:
                return kind
        raise UsageError("unknown model kind '{}', expected one of {}".format(
            value, ", ".join(k.cli_name for k in ModelKind)))


class ModelGraph:
    kind: ModelKind
    dim_w: int
    dim_a: int
    seed: int
    params: Dict[str, np.ndarray]
    version: int

    def __init__(self, kind: ModelKind, dim_w: int, dim_a: int, seed: int, params: Dict[str, np.ndarray],
                 units: int = LSTM_UNITS, dropout_rate: float = DROPOUT_RATE):
        self.kind = kind
        self.dim_w = dim_w
        self.dim_a = dim_a
        self.seed = seed
        self.params = params
        self.units = units
        self.dropout_rate = dropout_rate
        self.version = 0

    @property
    def lstm_input_dim(self) -> int:
        return (self.dim_w if self.kind.uses_text else 0) + (TIME_FEATURES if self.kind.uses_time else 0)

    @property
    def dense_input_dim(self) -> int:
        return (self.units if self.kind.has_lstm else 0) + (self.dim_a if self.kind.uses_audio else 0)

    def lstm_params(self) -> LstmParams:
        return LstmParams(self.params["lstm/W"], self.params["lstm/U"], self.params["lstm/b"],
                          dropout=self.dropout_rate, recurrent_dropout=self.dropout_rate)

    def dense_params(self) -> DenseParams:
        return DenseParams(self.params["dense/W"], self.params["dense/b"], Activation.SIGMOID)

    def n_params(self) -> int:
        return int(sum(v.size for v in self.params.values()))


def build_model(kind: ModelKind, dim_w: int, dim_a: int, seed: int) -> ModelGraph:
    if kind.uses_text and dim_w <= 0:
        raise ValueError("{} needs a positive word dimension".format(kind.display_name))
    if kind.uses_audio and dim_a <= 0:
        raise ValueError("{} needs a positive audio dimension".format(kind.display_name))
    rng = np.random.default_rng(seed)
    graph = ModelGraph(kind, dim_w, dim_a if kind.uses_audio else 0, seed, params={})
    if kind.has_lstm:
        lstm = init_lstm(graph.lstm_input_dim, graph.units, rng, graph.dropout_rate, graph.dropout_rate)
        graph.params.update({"lstm/W": lstm.W, "lstm/U": lstm.U, "lstm/b": lstm.b})
    dense = init_dense(graph.dense_input_dim, 1, rng)
    graph.params.update({"dense/W": dense.W, "dense/b": dense.b})
    return graph


def sequence_input(graph: ModelGraph, batch: Batch) -> np.ndarray:
    if graph.kind.uses_time and batch.time_input is None:
        raise MissingChannelError("model {} needs word timestamps".format(graph.kind.display_name))
    if graph.kind.uses_text and graph.kind.uses_time:
        return np.concatenate([batch.word_input, batch.time_input], axis=2)
    if graph.kind.uses_time:
        return batch.time_input
    return batch.word_input


def forward_pass(graph: ModelGraph, batch: Batch, training: bool = False,
                 rng: Optional[np.random.Generator] = None) -> Tuple[np.ndarray, Dict]:
    """Probabilities (B) and the cache needed by backward."""
    if graph.kind.uses_audio and batch.audio_input is None:
        raise MissingChannelError("model {} needs audio features".format(graph.kind.display_name),
                                  batch.record_ids)
    cache = {"version": graph.version}
    features = []
    if graph.kind.has_lstm:
        _, h_last, cache["lstm"] = lstm_forward(sequence_input(graph, batch), batch.seq_mask,
                                                graph.lstm_params(), training=training, rng=rng)
        features.append(h_last)
    if graph.kind.uses_audio:
        pooled, cache["pool"] = mean_pool_time(batch.audio_input, batch.audio_mask)
        dropped, cache["dropout"] = dropout(pooled, graph.dropout_rate, training=training, rng=rng)
        features.append(dropped)
    merged, cache["concat"] = concat(features)
    y, cache["dense"] = dense_forward(merged, graph.dense_params())
    return y[:, 0], cache


def forward(graph: ModelGraph, batch: Batch, training: bool = False,
            rng: Optional[np.random.Generator] = None) -> np.ndarray:
    return forward_pass(graph, batch, training=training, rng=rng)[0]


def backward(graph: ModelGraph, cache: Dict, dp: np.ndarray) -> Dict[str, np.ndarray]:
    """Gradients of every parameter given dL/dp."""
    if cache["version"] != graph.version:
        raise StaleCacheError("cache of parameter version {} used with version {}".format(cache["version"],
                                                                                        graph.version))
    grads = {}
    d_merged, dense_grads = dense_backward(dp[:, None], cache["dense"])
    grads["dense/W"], grads["dense/b"] = dense_grads["W"], dense_grads["b"]
    d_features = concat_backward(d_merged, cache["concat"])
    if graph.kind.has_lstm:
        _, lstm_grads = lstm_backward(d_features[0], cache["lstm"])
        for name, g in lstm_grads.items():
            grads["lstm/" + name] = g
    return grads


def loss_and_gradients(graph: ModelGraph, batch: Batch, training: bool = True,
                       rng: Optional[np.random.Generator] = None) -> Tuple[float, Dict[str, np.ndarray], np.ndarray]:
    p, cache = forward_pass(graph, batch, training=training, rng=rng)
    loss, dp = bce_loss(p, batch.labels)
    return loss, backward(graph, cache, dp), p


def apply_gradients(graph: ModelGraph, grads: Dict[str, np.ndarray], state: TrainState):
    adam_step(graph.params, grads, state)
    graph.version += 1


def predict(graph: ModelGraph, batch: Batch, threshold: float = 0.5) -> np.ndarray:
    return predict_from_probabilities(forward(graph, batch), threshold)


def predict_from_probabilities(p: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    return (np.asarray(p) >= threshold).astype(int)


def layer_rows(graph: ModelGraph) -> List[Tuple[str, str, str, int]]:
    rows = []
    kind = graph.kind
    if kind.has_lstm:
        if kind.uses_text:
            rows.append(("input_words", "Input", "(B, L, {})".format(graph.dim_w), 0))
        if kind.uses_time:
            rows.append(("input_times", "Input", "(B, L, {})".format(TIME_FEATURES), 0))
        if kind.uses_text and kind.uses_time:
            rows.append(("words_times", "Concatenate", "(B, L, {})".format(graph.lstm_input_dim), 0))
        rows.append(("lstm", "LSTM({}, dropout={}, recurrent_dropout={})".format(
            graph.units, graph.dropout_rate, graph.dropout_rate), "(B, {})".format(graph.units),
                     sum(graph.params[k].size for k in ["lstm/W", "lstm/U", "lstm/b"])))
    if kind.uses_audio:
        rows.append(("input_audio", "Input", "(B, T, {})".format(graph.dim_a), 0))
        rows.append(("audio_pool", "MeanPoolTime", "(B, {})".format(graph.dim_a), 0))
        rows.append(("audio_dropout", "Dropout({})".format(graph.dropout_rate), "(B, {})".format(graph.dim_a), 0))
    if kind.has_lstm and kind.uses_audio:
        rows.append(("fusion", "Concatenate", "(B, {})".format(graph.dense_input_dim), 0))
    rows.append(("dense", "Dense(1, sigmoid)", "(B, 1)", graph.params["dense/W"].size + graph.params["dense/b"].size))
    return rows


def describe_model(graph: ModelGraph) -> str:
    lines = ["Model: {}".format(graph.kind.display_name),
             "{:<14} {:<44} {:<14} {:>8}".format("layer", "type", "output", "params")]
    for name, layer_type, shape, count in layer_rows(graph):
        lines.append("{:<14} {:<44} {:<14} {:>8}".format(name, layer_type, shape, count))
    lines.append("Total params: {}".format(graph.n_params()))
    return "\n".join(lines)


def save_model(graph: ModelGraph, path: str):
    save_checkpoint(CheckpointData(kind=graph.kind.cli_name, dim_w=graph.dim_w, dim_a=graph.dim_a,
                                   seed=graph.seed, params=graph.params), path)


def load_model(path: str) -> ModelGraph:
    checkpoint = load_checkpoint(path)
    try:
        kind = ModelKind.from_string(checkpoint.kind)
    except UsageError:
        raise CheckpointFormatError("{}: unknown model kind '{}'".format(path, checkpoint.kind))
    graph = build_model(kind, checkpoint.dim_w, checkpoint.dim_a, checkpoint.seed)
    if set(checkpoint.params) != set(graph.params):
        raise CheckpointFormatError("{}: parameters {} do not match model {}".format(
            path, sorted(checkpoint.params), kind.display_name))
    for name, value in checkpoint.params.items():
        if value.shape != graph.params[name].shape:
            raise CheckpointFormatError("{}: parameter {} has shape {}, expected {}".format(
                path, name, value.shape, graph.params[name].shape))
        graph.params[name] = value.copy()
    return graph
