import csv
import os

import numpy as np
import pytest

from dementia_detection.corpus.chat_model import Group, SentenceRecord, SpeakerRole, Token
from dementia_detection.embeddings.embedding_utils import FeatureStore
from dementia_detection.embeddings.word_embeddings import WordEmbeddingTable
from dementia_detection.generic_tools.exceptions import ConfigError, DatasetError, NonFiniteLossError
from dementia_detection.models.model_graph import ModelKind, build_model
from dementia_detection.tensor_nn.losses import bce_loss
from dementia_detection.train_eval import trainer
from dementia_detection.train_eval.trainer import TrainConfig, evaluate, predict_probabilities, train, \
    write_epoch_logs


def toy_store():
    rng = np.random.default_rng(0)
    direction = np.array([1., -1., 0.5, 0.])
    vectors = {}
    for i in range(5):
        vectors["d{}".format(i)] = direction + 0.1 * rng.normal(size=4)
        vectors["c{}".format(i)] = -direction + 0.1 * rng.normal(size=4)
        vectors["s{}".format(i)] = 0.3 * rng.normal(size=4)
    return FeatureStore(WordEmbeddingTable.from_dict(vectors))


def toy_records(n, seed, transcript="t"):
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n):
        label = Group.DEMENTIA if i % 2 == 0 else Group.CONTROL
        prefix = "d" if label == Group.DEMENTIA else "c"
        length = int(rng.integers(2, 6))
        words = [(prefix if rng.random() < 0.7 else "s") + str(rng.integers(5)) for _ in range(length)]
        tokens = tuple(Token(w, 300 * k, 300 * k + 250) for k, w in enumerate(words))
        records.append(SentenceRecord(transcript, i, tokens, label, SpeakerRole.PARTICIPANT))
    return records


def test_config_validation():
    assert TrainConfig.default().validate().epochs == 50
    with pytest.raises(ConfigError) as e:
        TrainConfig(epochs=10, patience=10).validate()
    assert e.value.field == "train.patience"
    with pytest.raises(ConfigError) as e:
        TrainConfig(batch_size=0).validate()
    assert e.value.field == "train.batch_size"
    with pytest.raises(ConfigError):
        TrainConfig(threshold=1.).validate()


def test_zero_learning_rate_stops_after_eleven_epochs():
    store = toy_store()
    graph = build_model(ModelKind.TEXT, 4, 0, seed=1)
    before = {k: v.copy() for k, v in graph.params.items()}
    graph, logs = train(graph, toy_records(20, 1, "a"), toy_records(8, 2, "b"), store,
                        TrainConfig(epochs=50, patience=10, learning_rate=0.))
    assert len(logs) == 11
    assert [log.epoch for log in logs] == list(range(1, 12))
    assert len({log.val_loss for log in logs}) == 1
    for k, v in before.items():
        np.testing.assert_array_equal(graph.params[k], v)


def test_never_more_than_epochs():
    store = toy_store()
    graph = build_model(ModelKind.TEXT, 4, 0, seed=1)
    _, logs = train(graph, toy_records(20, 1, "a"), toy_records(8, 2, "b"), store,
                    TrainConfig(epochs=4, patience=3, learning_rate=0.01))
    assert len(logs) <= 4


def test_separable_data_train_loss_decreases():
    store = toy_store()
    graph = build_model(ModelKind.TEXT, 4, 0, seed=3)
    _, logs = train(graph, toy_records(64, 4, "a"), toy_records(16, 5, "b"), store,
                    TrainConfig(epochs=12, patience=11, learning_rate=0.02))
    losses = [log.train_loss for log in logs]
    assert len(losses) == 12
    assert np.mean(losses[-3:]) < np.mean(losses[:3])
    assert all(np.isfinite(log.val_loss) and log.val_loss >= 0 for log in logs)


def test_same_seed_same_logs(tmp_path):
    store = toy_store()
    paths = []
    for attempt in range(2):
        graph = build_model(ModelKind.TEXT_TIME, 4, 0, seed=7)
        _, logs = train(graph, toy_records(30, 1, "a"), toy_records(10, 2, "b"), store,
                        TrainConfig(epochs=4, patience=3, learning_rate=0.01, seed=11))
        path = os.path.join(str(tmp_path), "epochs_{}.csv".format(attempt))
        write_epoch_logs(logs, path)
        paths.append(path)
    with open(paths[0], "rb") as f1, open(paths[1], "rb") as f2:
        assert f1.read() == f2.read()
    with open(paths[0], newline="") as f:
        header = next(csv.reader(f))
    assert header[:3] == ["epoch", "train_loss", "val_loss"]


def test_restore_best_keeps_best_epoch():
    store = toy_store()
    val = toy_records(10, 2, "b")
    graph = build_model(ModelKind.TEXT, 4, 0, seed=5)
    graph, logs = train(graph, toy_records(30, 1, "a"), val, store,
                        TrainConfig(epochs=8, patience=2, learning_rate=0.05))
    probs = predict_probabilities(graph, val, store)
    loss, _ = bce_loss(probs, np.array([r.binary_label for r in val], dtype=float))
    assert loss == pytest.approx(min(log.val_loss for log in logs), abs=1e-12)


def test_non_finite_loss(monkeypatch):
    store = toy_store()
    graph = build_model(ModelKind.TEXT, 4, 0, seed=5)

    def nan_loss(graph, batch, training=True, rng=None):
        return float("nan"), {k: np.zeros_like(v) for k, v in graph.params.items()}, np.zeros(batch.size)

    monkeypatch.setattr(trainer, "loss_and_gradients", nan_loss)
    with pytest.raises(NonFiniteLossError) as e:
        train(graph, toy_records(20, 1, "a"), toy_records(8, 2, "b"), store, TrainConfig(epochs=3, patience=2))
    assert (e.value.epoch, e.value.batch_index) == (1, 0)


def test_empty_splits():
    store = toy_store()
    graph = build_model(ModelKind.TEXT, 4, 0, seed=5)
    with pytest.raises(DatasetError):
        train(graph, toy_records(20, 1), [], store, TrainConfig(epochs=3, patience=2))
    with pytest.raises(DatasetError):
        evaluate(graph, [], store)


def test_evaluate_counts():
    store = toy_store()
    graph = build_model(ModelKind.TEXT, 4, 0, seed=5)
    records = toy_records(12, 3)
    report, probs = evaluate(graph, records, store)
    assert report.n == 12
    assert probs.shape == (12,)
    assert report.tp + report.fn == 6
