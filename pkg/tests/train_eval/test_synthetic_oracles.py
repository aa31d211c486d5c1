"""End to end checks on synthetic corpora of known separability. Run with `pytest -m slow`."""
import os

import numpy as np
import pytest

from dementia_detection.augment.lexicon import load_lexicon
from dementia_detection.augment.synonym_replacement import AugmentationConfig
from dementia_detection.corpus.chat_model import SpeakerRole
from dementia_detection.corpus.corpus_data_generator import SynthSpec, generate_synthetic_corpus
from dementia_detection.corpus.corpus_loader import load_corpus
from dementia_detection.dataset.conditions import ConditionKind, ConditionSpec, build_condition
from dementia_detection.dataset.split import SplitPlan
from dementia_detection.embeddings.embedding_utils import FeatureStore
from dementia_detection.embeddings.word_embeddings import load_word_embeddings
from dementia_detection.models.model_graph import ModelKind
from dementia_detection.train_eval.experiment import run_experiment
from dementia_detection.train_eval.trainer import TrainConfig

pytestmark = pytest.mark.slow


def synthetic(root, **kwargs):
    generated = generate_synthetic_corpus(SynthSpec(**kwargs), root)
    corpus = load_corpus(root)
    store = FeatureStore(load_word_embeddings(generated.embedding_path), corpus.audio_refs)
    return generated, corpus, store


def test_fully_separable_text(tmp_path):
    _, corpus, store = synthetic(str(tmp_path / "corpus"), n_transcripts_per_group=70, separability=1., seed=11)
    assert len(corpus) >= 2000
    dataset = build_condition(corpus, ConditionSpec.default())
    results = run_experiment(dataset, [ModelKind.TEXT], SplitPlan(n_runs=1, seed=1),
                             TrainConfig.default(), store, str(tmp_path / "out"))
    storage = results[ModelKind.TEXT].storage
    assert storage.map_reports[(0, "val")].accuracy >= 0.95
    assert storage.map_reports[(0, "test")].auroc >= 0.98


def test_inseparable_text(tmp_path):
    _, corpus, store = synthetic(str(tmp_path / "corpus"), n_transcripts_per_group=40, separability=0., seed=12)
    assert any(r.speaker_role == SpeakerRole.INVESTIGATOR for r in corpus.records)
    dataset = build_condition(corpus, ConditionSpec.default())
    results = run_experiment(dataset, [ModelKind.TEXT], SplitPlan(n_runs=5, seed=2, test_fraction=0.4),
                             TrainConfig.default(), store, str(tmp_path / "out"))
    mean_auroc = results[ModelKind.TEXT].storage.aggregate("test").mean["auroc"]
    assert 0.45 <= mean_auroc <= 0.55


def test_augmentation_not_worse_on_small_data(tmp_path):
    generated, corpus, store = synthetic(str(tmp_path / "corpus"), n_transcripts_per_group=8,
                                         participant_sentences=15, investigator_sentences=2, separability=0.6,
                                         seed=13)
    records = corpus.records
    assert len(records) <= 300
    lexicon = load_lexicon(generated.lexicon_path)
    config = TrainConfig.default()
    plan = SplitPlan(n_runs=5, seed=3)
    aurocs = {}
    for kind, augmentation in [(ConditionKind.ORIGINAL, None),
                               (ConditionKind.ORIGINAL_AUGMENTED, AugmentationConfig.default())]:
        dataset = build_condition(records, ConditionSpec(kind, augmentation), lexicon)
        results = run_experiment(dataset, [ModelKind.TEXT], plan, config, store,
                                 os.path.join(str(tmp_path), kind.display_name), lexicon=lexicon)
        aurocs[kind] = results[ModelKind.TEXT].storage.aggregate("test").mean["auroc"]
    assert np.isfinite(aurocs[ConditionKind.ORIGINAL])
    assert aurocs[ConditionKind.ORIGINAL_AUGMENTED] >= aurocs[ConditionKind.ORIGINAL] - 0.02


def test_pipeline_is_reproducible(tmp_path):
    _, corpus, store = synthetic(str(tmp_path / "corpus"), n_transcripts_per_group=4, separability=0.5, seed=14)
    dataset = build_condition(corpus, ConditionSpec.default())
    contents = []
    for name in ["first", "second"]:
        output_dir = str(tmp_path / name)
        run_experiment(dataset, list(ModelKind), SplitPlan(n_runs=2, seed=4),
                       TrainConfig(epochs=4, patience=2, batch_size=8), store, output_dir)
        with open(os.path.join(output_dir, "metrics.csv"), "rb") as f:
            contents.append(f.read())
    assert contents[0] == contents[1]
