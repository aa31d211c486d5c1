import csv
import sys

import numpy as np
import pytest

from dementia_detection.augment.lexicon import SynonymLexicon, build_lexicon_from_wordnet, load_lexicon, \
    parse_lexicon, save_lexicon
from dementia_detection.augment.synonym_replacement import AugmentationConfig, augment_dataset, \
    augment_sentence, augment_splits, write_augmentation_report
from dementia_detection.corpus.chat_model import Group, SentenceRecord, SpeakerRole, Token
from dementia_detection.generic_tools.exceptions import ConfigError, DatasetError, LexiconFormatError


def sentence(words, label=Group.DEMENTIA, index=0, timestamps=True):
    tokens = tuple(Token(w, 100 * i, 100 * i + 90) if timestamps else Token(w) for i, w in enumerate(words))
    return SentenceRecord("t", index, tokens, label, SpeakerRole.PARTICIPANT)


def test_parse_lexicon_examples():
    lexicon = parse_lexicon(["girl\tmiss,lass", "tape\ttape", "recorder\tvideotape recorder"])
    assert lexicon.entries == {"girl": ["miss", "lass"], "tape": [], "recorder": []}
    assert lexicon.dropped_multiword == 1


def test_parse_lexicon_normalizes_and_merges():
    lexicon = parse_lexicon(["# synonyms", "Boy\tLad,lad,boy,male_child", "", "boy\tson"])
    assert lexicon.entries == {"boy": ["lad", "son"]}
    assert lexicon.dropped_multiword == 1


def test_parse_lexicon_malformed_line():
    with pytest.raises(LexiconFormatError) as e:
        parse_lexicon(["girl\tmiss", "broken line"])
    assert e.value.line_number == 2


def test_save_then_load(tmp_path):
    lexicon = SynonymLexicon.from_dict({"jar": ["pot", "container"], "cookie": ["biscuit"]})
    path = str(tmp_path / "lexicon.tsv")
    save_lexicon(lexicon, path)
    assert load_lexicon(path).entries == lexicon.entries


def test_shuffled_lexicon_is_a_seeded_permutation():
    lexicon = parse_lexicon(["# shuffled", "big\ta,b,c,d,e,f"])
    assert lexicon.shuffled
    first = lexicon.synonyms("big", seed=3)
    assert sorted(first) == ["a", "b", "c", "d", "e", "f"]
    assert lexicon.synonyms("big", seed=3) == first


def test_five_words_five_sentences():
    lexicon = SynonymLexicon.from_dict({"the": ["a"], "boy": ["lad"], "is": ["be"], "on": ["upon"],
                                        "stool": ["seat"]})
    rec = sentence(["the", "boy", "is", "on", "stool"])
    out = augment_sentence(rec, lexicon, AugmentationConfig(replacements_per_word=1))
    assert len(out) == 5
    for p, child in enumerate(out):
        assert child.provenance.replaced_position == p
        assert sum(a != b for a, b in zip(rec.words, child.words)) == 1


def test_no_synonyms():
    lexicon = SynonymLexicon.from_dict({"jar": ["pot"]})
    assert augment_sentence(sentence(["the", "boy"]), lexicon, AugmentationConfig()) == []


def test_position_then_rank_order():
    lexicon = SynonymLexicon.from_dict({"w1": ["a", "b"], "w2": ["c"]})
    out = augment_sentence(sentence(["w1", "w2"]), lexicon, AugmentationConfig(replacements_per_word=2))
    assert [(r.provenance.replaced_position, r.provenance.synonym_used) for r in out] == \
           [(0, "a"), (0, "b"), (1, "c")]
    assert [r.words for r in out] == [["a", "w2"], ["b", "w2"], ["w1", "c"]]


def test_timestamps_inherited():
    lexicon = SynonymLexicon.from_dict({"boy": ["lad"]})
    rec = sentence(["the", "boy"])
    child = augment_sentence(rec, lexicon, AugmentationConfig())[0]
    assert (child.tokens[1].start_ms, child.tokens[1].end_ms) == (rec.tokens[1].start_ms, rec.tokens[1].end_ms)
    assert child.record_id == "t#0~p1:lad"
    assert child.parent_id == rec.parent_id


def test_augmented_input_rejected():
    lexicon = SynonymLexicon.from_dict({"boy": ["lad"]})
    child = augment_sentence(sentence(["boy"]), lexicon, AugmentationConfig())[0]
    with pytest.raises(DatasetError):
        augment_sentence(child, lexicon, AugmentationConfig())


def test_config_validation():
    with pytest.raises(ConfigError):
        AugmentationConfig(replacements_per_word=0).validate()


def test_augmentation_laws_random():
    rng = np.random.default_rng(42)
    vocabulary = ["w{}".format(i) for i in range(15)]
    for case in range(1000):
        raw = {}
        for w in vocabulary:
            k = int(rng.integers(0, 4))
            raw[w] = ["s{}".format(int(x)) for x in rng.integers(0, 10, size=k)]
        lexicon = SynonymLexicon.from_dict(raw)
        n = int(rng.integers(1, 4))
        config = AugmentationConfig(replacements_per_word=n, seed=case)
        words = [vocabulary[int(i)] for i in rng.integers(0, 15, size=int(rng.integers(1, 8)))]
        label = Group.DEMENTIA if case % 2 else Group.CONTROL
        rec = sentence(words, label=label, timestamps=bool(case % 3))
        out = augment_sentence(rec, lexicon, config)
        bound = sum(min(n, len(lexicon.synonyms(w))) for w in words)
        assert len(out) <= bound
        assert len({tuple(r.words) for r in out}) == len(out)
        for child in out:
            assert child.label == rec.label
            assert child.speaker_role == rec.speaker_role
            assert sum(a != b for a, b in zip(rec.words, child.words)) == 1
        assert [r.words for r in augment_sentence(rec, lexicon, config)] == [r.words for r in out]
        dataset = augment_dataset([rec], lexicon, config)
        assert len(dataset) == 1 + len(out)
        assert dataset[0] is rec


def test_identical_inputs_identical_outputs():
    lexicon = SynonymLexicon.from_dict({"boy": ["lad", "youth"], "jar": ["pot"]})
    a = sentence(["boy", "jar"], index=0)
    b = sentence(["boy", "jar"], index=1)
    out = augment_dataset([a, b], lexicon, AugmentationConfig(replacements_per_word=2))
    assert [r.words for r in out[:4]] == [r.words for r in out[4:]]


def test_augment_splits_keeps_parents_in_split():
    lexicon = SynonymLexicon.from_dict({"boy": ["lad"], "jar": ["pot"]})
    parts = {"train": [sentence(["boy"], index=0)], "test": [sentence(["jar", "boy"], index=1)]}
    out = augment_splits(parts, lexicon, AugmentationConfig())
    for name, records in out.items():
        parents = {r.parent_id for r in records if r.provenance.is_original}
        assert all(r.parent_id in parents for r in records)
    assert len(out["test"]) == 3


def test_augmentation_report(tmp_path):
    lexicon = SynonymLexicon.from_dict({"boy": ["lad"]})
    records = augment_dataset([sentence(["the", "boy"])], lexicon, AugmentationConfig())
    path = str(tmp_path / "augmentation_report.csv")
    write_augmentation_report(records, path)
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows == [["parent_id", "position", "original_word", "synonym"], ["t#0", "1", "boy", "lad"]]


def test_wordnet_lexicon_lemmas(fake_wordnet):
    synsets = {"girl": [["girl", "miss", "Lass"], ["girl", "female_child", "lass", "daughter"]],
               "boy": [["boy", "male_child"]]}
    fake_wordnet["lookup"] = lambda word: synsets.get(word, [])
    lexicon = build_lexicon_from_wordnet(["Girl", "boy", "cookie", "girl"])
    assert lexicon.entries == {"girl": ["miss", "lass", "daughter"]}
    assert lexicon.dropped_multiword == 2


def test_wordnet_lexicon_saved_and_reloaded(fake_wordnet, tmp_path):
    fake_wordnet["lookup"] = lambda word: [[word, word + "s"]]
    path = str(tmp_path / "lexicon.tsv")
    save_lexicon(build_lexicon_from_wordnet(["jar", "stool"]), path)
    assert load_lexicon(path).entries == {"jar": ["jars"], "stool": ["stools"]}


def test_wordnet_lexicon_without_nltk(monkeypatch):
    monkeypatch.setitem(sys.modules, "nltk", None)
    monkeypatch.setitem(sys.modules, "nltk.corpus", None)
    with pytest.raises(ConfigError) as e:
        build_lexicon_from_wordnet(["girl"])
    assert e.value.field == "wordnet_lexicon"
