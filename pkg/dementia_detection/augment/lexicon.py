"""
Synonym lexicon: one entry per line, "word<TAB>syn1,syn2,...".

A first line "# shuffled" marks a lexicon whose lists are read in a seeded random order instead of file
order. Other lines starting with "#" are comments.
"""
import logging
import zlib
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from dementia_detection.generic_tools.exceptions import ConfigError, LexiconFormatError

logger = logging.getLogger(__name__)

SHUFFLED_MARK = "# shuffled"


def is_single_word(word: str) -> bool:
    return len(word) > 0 and not any(c.isspace() for c in word) and "_" not in word


def clean_synonyms(headword: str, synonyms: Iterable[str]) -> Tuple[List[str], int]:
    """Lowercased, deduplicated synonyms in first-seen order, without the headword; multi-word ones dropped."""
    kept: List[str] = []
    dropped = 0
    for s in synonyms:
        s = s.strip().lower()
        if len(s) == 0:
            continue
        if not is_single_word(s):
            dropped += 1
            continue
        if s == headword or s in kept:
            continue
        kept.append(s)
    return kept, dropped


class SynonymLexicon:
    entries: Dict[str, List[str]]
    shuffled: bool
    dropped_multiword: int

    def __init__(self, entries: Dict[str, List[str]], shuffled: bool = False, dropped_multiword: int = 0):
        self.entries = entries
        self.shuffled = shuffled
        self.dropped_multiword = dropped_multiword

    @staticmethod
    def from_dict(raw: Dict[str, Iterable[str]], shuffled: bool = False) -> "SynonymLexicon":
        entries: Dict[str, List[str]] = {}
        dropped = 0
        for word, synonyms in raw.items():
            head = word.strip().lower()
            kept, d = clean_synonyms(head, list(entries.get(head, [])) + list(synonyms))
            entries[head] = kept
            dropped += d
        return SynonymLexicon(entries, shuffled=shuffled, dropped_multiword=dropped)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, word: str):
        return word in self.entries

    def synonyms(self, word: str, seed: Optional[int] = None) -> List[str]:
        synonyms = self.entries.get(word, [])
        if not self.shuffled or len(synonyms) < 2:
            return list(synonyms)
        rng = np.random.default_rng([seed if seed is not None else 0, zlib.crc32(word.encode("utf-8"))])
        return [synonyms[i] for i in rng.permutation(len(synonyms))]

    def n_synonyms(self) -> int:
        return sum(len(s) for s in self.entries.values())


def parse_lexicon(lines: Iterable[str]) -> SynonymLexicon:
    entries: Dict[str, List[str]] = {}
    shuffled = False
    dropped = 0
    for line_number, line in enumerate(lines, start=1):
        line = line.rstrip("\n").rstrip("\r")
        if line_number == 1 and line.strip().lower() == SHUFFLED_MARK:
            shuffled = True
            continue
        if len(line.strip()) == 0 or line.startswith("#"):
            continue
        if "\t" not in line:
            raise LexiconFormatError(line_number, "expected 'word<TAB>synonyms'")
        head, _, synonyms = line.partition("\t")
        head = head.strip().lower()
        if not is_single_word(head):
            raise LexiconFormatError(line_number, "headword '{}' is not a single word".format(head))
        if "\t" in synonyms:
            raise LexiconFormatError(line_number, "more than one tab")
        kept, d = clean_synonyms(head, entries.get(head, []) + synonyms.split(","))
        entries[head] = kept
        dropped += d
    if dropped > 0:
        logger.warning("dropped %d multi-word synonyms", dropped)
    return SynonymLexicon(entries, shuffled=shuffled, dropped_multiword=dropped)


def load_lexicon(path: str) -> SynonymLexicon:
    with open(path, "r", encoding="utf-8") as f:
        lexicon = parse_lexicon(f)
    logger.info("lexicon %s: %d headwords, %d synonyms%s", path, len(lexicon), lexicon.n_synonyms(),
                " (shuffled)" if lexicon.shuffled else "")
    return lexicon


def save_lexicon(lexicon: SynonymLexicon, path: str):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        if lexicon.shuffled:
            f.write(SHUFFLED_MARK + "\n")
        for word in sorted(lexicon.entries):
            f.write("{}\t{}\n".format(word, ",".join(lexicon.entries[word])))


def build_lexicon_from_wordnet(words: Iterable[str]) -> SynonymLexicon:
    """
    Synonyms from the lemma names of every WordNet synset of each word. Needs the optional nltk dependency
    and its wordnet corpus (nltk.download("wordnet")).
    """
    try:
        from nltk.corpus import wordnet
    except ImportError:
        raise ConfigError("wordnet_lexicon", "needs nltk, install the wordnet extra")

    entries: Dict[str, List[str]] = {}
    dropped = 0
    for word in sorted(set(w.lower() for w in words)):
        try:
            lemma_names = [lemma.name() for synset in wordnet.synsets(word) for lemma in synset.lemmas()]
        except LookupError:
            raise ConfigError("wordnet_lexicon", "nltk wordnet corpus missing, run nltk.download(\"wordnet\")")
        kept, d = clean_synonyms(word, lemma_names)
        dropped += d
        if len(kept) > 0:
            entries[word] = kept
    logger.info("wordnet lexicon: %d headwords, %d multi-word lemmas dropped", len(entries), dropped)
    return SynonymLexicon(entries, dropped_multiword=dropped)
