import sys
import types

import pytest


class FakeLemma:
    def __init__(self, name):
        self._name = name

    def name(self):
        return self._name


class FakeSynset:
    def __init__(self, names):
        self._lemmas = [FakeLemma(n) for n in names]

    def lemmas(self):
        return self._lemmas


@pytest.fixture
def fake_wordnet(monkeypatch):
    """Replaces nltk.corpus.wordnet; assign a function word -> list of synsets (lists of lemma names)."""
    table = {"lookup": lambda word: []}
    wordnet = types.SimpleNamespace(synsets=lambda word: [FakeSynset(names) for names in table["lookup"](word)])
    corpus = types.ModuleType("nltk.corpus")
    corpus.wordnet = wordnet
    nltk = types.ModuleType("nltk")
    nltk.corpus = corpus
    monkeypatch.setitem(sys.modules, "nltk", nltk)
    monkeypatch.setitem(sys.modules, "nltk.corpus", corpus)
    return table
