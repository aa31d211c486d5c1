import os

import numpy as np
import pytest

from dementia_detection.augment.lexicon import load_lexicon
from dementia_detection.corpus.chat_model import Group, SpeakerRole
from dementia_detection.corpus.corpus_data_generator import SynthSpec, generate_synthetic_corpus, \
    investigator_prompts
from dementia_detection.corpus.corpus_loader import load_corpus
from dementia_detection.embeddings.embedding_utils import FeatureStore
from dementia_detection.embeddings.word_embeddings import load_word_embeddings
from dementia_detection.generic_tools.exceptions import ConfigError


def small_spec(**kwargs):
    values = dict(n_transcripts_per_group=3, participant_sentences=6, investigator_sentences=2,
                  class_vocab_size=20, dim_w=8, dim_a=4, seed=3)
    values.update(kwargs)
    return SynthSpec(**values)


def file_tree(root):
    tree = {}
    for directory, _, files in os.walk(root):
        for name in files:
            path = os.path.join(directory, name)
            with open(path, "rb") as f:
                tree[os.path.relpath(path, root)] = f.read()
    return tree


def test_same_seed_same_files(tmp_path):
    generate_synthetic_corpus(small_spec(), str(tmp_path / "a"))
    generate_synthetic_corpus(small_spec(), str(tmp_path / "b"))
    first, second = file_tree(str(tmp_path / "a")), file_tree(str(tmp_path / "b"))
    assert sorted(first) == sorted(second)
    assert all(first[k] == second[k] for k in first)


def test_other_seed_other_files(tmp_path):
    generate_synthetic_corpus(small_spec(), str(tmp_path / "a"))
    generate_synthetic_corpus(small_spec(seed=4), str(tmp_path / "b"))
    assert file_tree(str(tmp_path / "a")) != file_tree(str(tmp_path / "b"))


def test_counts_match_loaded_corpus(tmp_path):
    root = str(tmp_path)
    generated = generate_synthetic_corpus(small_spec(), root)
    corpus = load_corpus(root)
    assert generated.n_transcripts == 6
    assert corpus.count_by_label() == generated.counts
    assert len(corpus) == 6 * 8
    investigators = [r for r in corpus.records if r.speaker_role == SpeakerRole.INVESTIGATOR]
    assert len(investigators) == 12
    assert generated.counts[Group.DEMENTIA] == 18


def test_features_resolve(tmp_path):
    root = str(tmp_path)
    generated = generate_synthetic_corpus(small_spec(), root)
    corpus = load_corpus(root)
    table = load_word_embeddings(generated.embedding_path)
    assert table.dim == 8
    store = FeatureStore(table, corpus.audio_refs)
    assert all(store.has_audio(r) for r in corpus.records)
    assert store.audio_dim == 4
    assert 0. < store.oov_rate(corpus.records) < 0.5
    lexicon = load_lexicon(generated.lexicon_path)
    assert len(lexicon) > 0


def test_timestamps_mostly_present(tmp_path):
    root = str(tmp_path)
    generate_synthetic_corpus(small_spec(missing_timestamp_rate=0.), root)
    corpus = load_corpus(root)
    assert all(r.has_timestamps for r in corpus.records)
    durations = [t.end_ms - t.start_ms for r in corpus.records for t in r.tokens if not t.interpolated]
    assert min(durations) >= 200 and max(durations) <= 600


def test_separated_classes_differ_in_length(tmp_path):
    root = str(tmp_path)
    generate_synthetic_corpus(small_spec(n_transcripts_per_group=10, separability=1.), root)
    corpus = load_corpus(root)
    participants = [r for r in corpus.records if r.speaker_role == SpeakerRole.PARTICIPANT]
    dementia = np.mean([len(r.tokens) for r in participants if r.label == Group.DEMENTIA])
    control = np.mean([len(r.tokens) for r in participants if r.label == Group.CONTROL])
    assert dementia < control


@pytest.mark.parametrize("field, value", [("separability", 1.5), ("separability", -0.1), ("dim_w", 0),
                                          ("markup_rate", 2.), ("n_transcripts_per_group", 0)])
def test_spec_validation(field, value):
    spec = small_spec(**{field: value})
    with pytest.raises(ConfigError) as e:
        spec.validate()
    assert e.value.field == "synth." + field


def investigator_words(root, separability):
    generate_synthetic_corpus(small_spec(n_transcripts_per_group=4, separability=separability), root)
    corpus = load_corpus(root)
    return [set(r.words) for r in corpus.records if r.speaker_role == SpeakerRole.INVESTIGATOR]


def test_investigator_speech_neutral_without_separability(tmp_path):
    prompt_words = {w for p in investigator_prompts for w in p}
    neutral = investigator_words(str(tmp_path / "neutral"), 0.)
    assert len(neutral) > 0
    assert not any(words <= prompt_words for words in neutral)
    separated = investigator_words(str(tmp_path / "separated"), 1.)
    assert all(words <= prompt_words for words in separated)
