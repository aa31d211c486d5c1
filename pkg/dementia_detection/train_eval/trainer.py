import csv
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from dementia_detection.corpus.chat_model import SentenceRecord
from dementia_detection.dataset.batching import make_batches
from dementia_detection.embeddings.embedding_utils import FeatureStore
from dementia_detection.generic_tools.exceptions import ConfigError, DatasetError, NonFiniteLossError
from dementia_detection.models.model_graph import ModelGraph, apply_gradients, forward, loss_and_gradients
from dementia_detection.tensor_nn.losses import bce_loss
from dementia_detection.tensor_nn.optimizer import TrainState
from dementia_detection.train_eval.metrics import METRIC_NAMES, MetricsReport, compute_metrics

logger = logging.getLogger(__name__)


class TrainConfig:
    epochs: int
    batch_size: int
    patience: int
    learning_rate: float
    beta1: float
    beta2: float
    epsilon: float
    seed: int
    restore_best: bool
    threshold: float
    verbose: bool

    def __init__(self, epochs: int = 50, batch_size: int = 16, patience: int = 10, learning_rate: float = 0.001,
                 beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-7, seed: int = 0,
                 restore_best: bool = True, threshold: float = 0.5, verbose: bool = False):
        self.epochs = epochs
        self.batch_size = batch_size
        self.patience = patience
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.seed = seed
        self.restore_best = restore_best
        self.threshold = threshold
        self.verbose = verbose

    @staticmethod
    def default():
        return TrainConfig(epochs=50, batch_size=16, patience=10, learning_rate=0.001, beta1=0.9, beta2=0.999,
                           epsilon=1e-7, seed=0, restore_best=True, threshold=0.5)

    def validate(self):
        for name in ["epochs", "batch_size", "patience"]:
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError("train." + name, "must be an integer >= 1, got {}".format(value))
        if self.patience >= self.epochs:
            raise ConfigError("train.patience", "must be smaller than epochs ({} >= {})".format(self.patience,
                                                                                             self.epochs))
        if self.learning_rate < 0:
            raise ConfigError("train.learning_rate", "must be non negative")
        for name in ["beta1", "beta2"]:
            if not 0. <= getattr(self, name) < 1.:
                raise ConfigError("train." + name, "must lie in [0, 1)")
        if self.epsilon <= 0:
            raise ConfigError("train.epsilon", "must be positive")
        if self.seed < 0:
            raise ConfigError("train.seed", "must be non negative")
        if not 0. < self.threshold < 1.:
            raise ConfigError("threshold", "must lie strictly between 0 and 1")
        return self

    def train_state(self) -> TrainState:
        return TrainState(learning_rate=self.learning_rate, beta1=self.beta1, beta2=self.beta2,
                          epsilon=self.epsilon)


class EpochLog:
    epoch: int
    train_loss: float
    val_loss: float
    val_metrics: MetricsReport

    def __init__(self, epoch: int, train_loss: float, val_loss: float, val_metrics: MetricsReport):
        self.epoch = epoch
        self.train_loss = train_loss
        self.val_loss = val_loss
        self.val_metrics = val_metrics


def predict_probabilities(graph: ModelGraph, records: Sequence[SentenceRecord], store: FeatureStore,
                          batch_size: int = 16) -> np.ndarray:
    """Inference probabilities in record order."""
    batches = make_batches(records, store, batch_size=batch_size, need_audio=graph.kind.uses_audio,
                           need_time=graph.kind.uses_time)
    if len(batches) == 0:
        return np.zeros(0)
    return np.concatenate([forward(graph, b) for b in batches])


def evaluate(graph: ModelGraph, records: Sequence[SentenceRecord], store: FeatureStore,
             threshold: float = 0.5, batch_size: int = 16) -> Tuple[MetricsReport, np.ndarray]:
    if len(records) == 0:
        raise DatasetError("cannot evaluate an empty split")
    probs = predict_probabilities(graph, records, store, batch_size)
    return compute_metrics(probs, [r.binary_label for r in records], threshold), probs


def train(graph: ModelGraph,
          train_records: Sequence[SentenceRecord],
          val_records: Sequence[SentenceRecord],
          store: FeatureStore,
          config: TrainConfig) -> Tuple[ModelGraph, List[EpochLog]]:
    """
    Adam on mini batches with early stopping: training stops once the validation loss has not gone below
    its best value for `patience` consecutive epochs. With restore_best the parameters of the best epoch
    are put back at the end.
    """
    config.validate()
    if len(train_records) == 0 or len(val_records) == 0:
        raise DatasetError("training needs non empty train and validation splits ({} and {} sentences)".format(
            len(train_records), len(val_records)))
    need_audio, need_time = graph.kind.uses_audio, graph.kind.uses_time
    val_labels = np.array([r.binary_label for r in val_records], dtype=np.float64)
    state = config.train_state()
    logs: List[EpochLog] = []
    best_loss = np.inf
    best_params: Optional[Dict[str, np.ndarray]] = None
    best_epoch = 0
    wait = 0
    for epoch in tqdm(range(1, config.epochs + 1), disable=not config.verbose,
                      desc=graph.kind.display_name):
        rng = np.random.default_rng([config.seed, epoch])
        batches = make_batches(train_records, store, batch_size=config.batch_size, shuffle_seed=config.seed,
                               epoch=epoch, need_audio=need_audio, need_time=need_time)
        total = 0.
        for batch_index, batch in enumerate(batches):
            loss, grads, _ = loss_and_gradients(graph, batch, training=True, rng=rng)
            if not np.isfinite(loss):
                raise NonFiniteLossError(epoch, batch_index, loss)
            apply_gradients(graph, grads, state)
            total += loss * batch.size
            logger.debug("epoch %d batch %d loss %.6f", epoch, batch_index, loss)
        train_loss = total / len(train_records)
        val_probs = predict_probabilities(graph, val_records, store, config.batch_size)
        val_loss, _ = bce_loss(val_probs, val_labels)
        if not np.isfinite(val_loss):
            raise NonFiniteLossError(epoch, -1, val_loss)
        metrics = compute_metrics(val_probs, val_labels, config.threshold)
        logs.append(EpochLog(epoch, train_loss, val_loss, metrics))
        logger.info("%s epoch %d: train loss %.4f, val loss %.4f, val accuracy %.4f", graph.kind.display_name,
                    epoch, train_loss, val_loss, metrics.accuracy)
        if val_loss < best_loss:
            best_loss = val_loss
            best_epoch = epoch
            best_params = {k: v.copy() for k, v in graph.params.items()}
            wait = 0
        else:
            wait += 1
            if wait >= config.patience:
                logger.info("early stopping after epoch %d, best epoch %d", epoch, best_epoch)
                break
    if config.restore_best and best_params is not None:
        for k, v in best_params.items():
            graph.params[k][...] = v
        graph.version += 1
    return graph, logs


def write_epoch_logs(logs: Sequence[EpochLog], path: str):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "train_loss", "val_loss"] + ["val_" + m for m in METRIC_NAMES])
        for log in logs:
            writer.writerow([log.epoch, repr(log.train_loss), repr(log.val_loss)]
                            + [repr(log.val_metrics.value(m)) for m in METRIC_NAMES])
