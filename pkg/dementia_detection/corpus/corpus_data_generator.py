"""
Synthetic picture-description corpus, written in the same layout as a real one: CHAT transcripts with
word bullets, index.tsv, one directory of AEMB audio features per transcript, a binary word embedding
file and a synonym lexicon.

The separability knob delta mixes the two classes: at 0 dementia and control sentences come from the same
distribution, at 1 the vocabulary, word vectors, audio frames and pauses all tell the classes apart.
Dementia sentences get shorter and more repetitive as delta grows; one-word answers ("yes", "okay")
appear in both classes at a rate falling with delta.
"""
import logging
import os
from typing import Dict, List, Tuple

import numpy as np
from tqdm import tqdm

from dementia_detection.corpus.chat_model import Group
from dementia_detection.corpus.chat_parser import BULLET
from dementia_detection.corpus.corpus_loader import INDEX_FILE_NAME
from dementia_detection.embeddings.audio_features import AudioFeatureSequence, save_audio_features
from dementia_detection.embeddings.embedding_utils import AUDIO_FILE_SUFFIX
from dementia_detection.embeddings.word_embeddings import WordEmbeddingTable, save_word_embeddings
from dementia_detection.generic_tools.exceptions import ConfigError, DataError
from dementia_detection.generic_tools.path_tools import ensure_directory

logger = logging.getLogger(__name__)

EMBEDDING_FILE_NAME = "embeddings.bin"
LEXICON_FILE_NAME = "lexicon.tsv"
TRANSCRIPT_DIR = "transcripts"
AUDIO_DIR = "audio"

scene_words = ["the", "a", "and", "is", "boy", "girl", "mother", "cookie", "jar", "stool", "sink", "water",
               "window", "dishes", "plate", "kitchen", "curtains", "falling", "taking", "washing",
               "overflowing", "he", "she", "her", "his", "on", "in", "of", "to", "there", "it", "up"]
short_responses = ["yes", "okay", "mhm", "no", "right", "well"]
investigator_prompts = [["tell", "me", "what", "you", "see"], ["anything", "else"],
                        ["what", "is", "happening", "there"], ["good"], ["take", "your", "time"]]
consonants = "bdfgklmnprstvz"
vowels = "aeiou"


class SynthSpec:
    n_transcripts_per_group: int
    participant_sentences: int
    investigator_sentences: int
    mean_sentence_length: float
    shared_fraction: float
    class_vocab_size: int
    separability: float
    dim_w: int
    dim_a: int
    word_signal: float
    audio_signal: float
    noise_scale: float
    short_response_rate: float
    missing_timestamp_rate: float
    utterance_bullet_rate: float
    markup_rate: float
    oov_fraction: float
    lexicon_coverage: float
    seed: int

    def __init__(self, n_transcripts_per_group: int = 20, participant_sentences: int = 12,
                 investigator_sentences: int = 3, mean_sentence_length: float = 8.,
                 shared_fraction: float = 0.3, class_vocab_size: int = 80, separability: float = 1.,
                 dim_w: int = 50, dim_a: int = 32, word_signal: float = 1., audio_signal: float = 1.,
                 noise_scale: float = 0.5, short_response_rate: float = 0.1,
                 missing_timestamp_rate: float = 0.03, utterance_bullet_rate: float = 0.2,
                 markup_rate: float = 0.1, oov_fraction: float = 0.1, lexicon_coverage: float = 0.6,
                 seed: int = 0):
        self.n_transcripts_per_group = n_transcripts_per_group
        self.participant_sentences = participant_sentences
        self.investigator_sentences = investigator_sentences
        self.mean_sentence_length = mean_sentence_length
        self.shared_fraction = shared_fraction
        self.class_vocab_size = class_vocab_size
        self.separability = separability
        self.dim_w = dim_w
        self.dim_a = dim_a
        self.word_signal = word_signal
        self.audio_signal = audio_signal
        self.noise_scale = noise_scale
        self.short_response_rate = short_response_rate
        self.missing_timestamp_rate = missing_timestamp_rate
        self.utterance_bullet_rate = utterance_bullet_rate
        self.markup_rate = markup_rate
        self.oov_fraction = oov_fraction
        self.lexicon_coverage = lexicon_coverage
        self.seed = seed

    @staticmethod
    def default():
        return SynthSpec()

    def validate(self):
        for name in ["n_transcripts_per_group", "participant_sentences", "class_vocab_size", "dim_w", "dim_a"]:
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError("synth." + name, "must be an integer >= 1, got {}".format(value))
        if not isinstance(self.investigator_sentences, int) or self.investigator_sentences < 0:
            raise ConfigError("synth.investigator_sentences", "must be a non negative integer")
        if self.mean_sentence_length < 1:
            raise ConfigError("synth.mean_sentence_length", "must be >= 1")
        if not 0. <= self.separability <= 1.:
            raise ConfigError("synth.separability", "must lie in [0, 1], got {}".format(self.separability))
        for name in ["shared_fraction", "short_response_rate", "missing_timestamp_rate", "utterance_bullet_rate",
                     "markup_rate", "oov_fraction", "lexicon_coverage"]:
            value = getattr(self, name)
            if not 0. <= value <= 1.:
                raise ConfigError("synth." + name, "must lie in [0, 1], got {}".format(value))
        if self.shared_fraction >= 1.:
            raise ConfigError("synth.shared_fraction", "must be smaller than 1")
        if self.missing_timestamp_rate + self.utterance_bullet_rate > 1.:
            raise ConfigError("synth.utterance_bullet_rate", "missing_timestamp_rate + utterance_bullet_rate "
                                                             "must not exceed 1")
        for name in ["word_signal", "audio_signal", "noise_scale"]:
            if getattr(self, name) < 0:
                raise ConfigError("synth." + name, "must be non negative")
        if self.seed < 0:
            raise ConfigError("synth.seed", "must be non negative")
        return self


class GeneratedCorpus:
    root: str
    embedding_path: str
    lexicon_path: str
    counts: Dict[Group, int]
    n_transcripts: int

    def __init__(self, root: str, embedding_path: str, lexicon_path: str, counts: Dict[Group, int],
                 n_transcripts: int):
        self.root = root
        self.embedding_path = embedding_path
        self.lexicon_path = lexicon_path
        self.counts = counts
        self.n_transcripts = n_transcripts

    @property
    def n_sentences(self) -> int:
        return sum(self.counts.values())


class _Vocabulary:
    shared: List[str]
    pools: Dict[Group, List[str]]
    oov: set

    def __init__(self, shared: List[str], pools: Dict[Group, List[str]], oov: set):
        self.shared = shared
        self.pools = pools
        self.oov = oov


def pseudo_words(n: int, rng: np.random.Generator, taken: set) -> List[str]:
    words = []
    while len(words) < n:
        n_syllables = int(rng.integers(2, 4))
        w = "".join(consonants[rng.integers(len(consonants))] + vowels[rng.integers(len(vowels))]
                    for _ in range(n_syllables))
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


def _vocabulary(spec: SynthSpec, rng: np.random.Generator) -> _Vocabulary:
    taken = set(scene_words) | set(short_responses) | {w for p in investigator_prompts for w in p}
    pools = {Group.DEMENTIA: pseudo_words(spec.class_vocab_size, rng, taken),
             Group.CONTROL: pseudo_words(spec.class_vocab_size, rng, taken)}
    n_oov = int(round(spec.oov_fraction * len(scene_words)))
    oov = set(rng.choice(scene_words, size=n_oov, replace=False).tolist()) if n_oov > 0 else set()
    return _Vocabulary(shared=list(scene_words), pools=pools, oov=oov)


def _class_word(vocabulary: _Vocabulary, group: Group, delta: float, rng: np.random.Generator) -> str:
    own = rng.random() < (1. + delta) / 2.
    other = Group.CONTROL if group == Group.DEMENTIA else Group.DEMENTIA
    pool = vocabulary.pools[group if own else other]
    return pool[rng.integers(len(pool))]


def sample_sentence(spec: SynthSpec, vocabulary: _Vocabulary, group: Group,
                    rng: np.random.Generator) -> List[str]:
    """Words of one sentence spoken by a member of `group`."""
    delta = spec.separability
    if rng.random() < spec.short_response_rate * (1. - delta):
        return [short_responses[rng.integers(len(short_responses))]]
    rate = spec.mean_sentence_length - 1.
    if group == Group.DEMENTIA:
        rate *= 1. - 0.5 * delta
    length = 1 + int(rng.poisson(rate))
    words = []
    for _ in range(length):
        if rng.random() < spec.shared_fraction:
            words.append(vocabulary.shared[rng.integers(len(vocabulary.shared))])
        else:
            words.append(_class_word(vocabulary, group, delta, rng))
    class_words = set(vocabulary.pools[Group.DEMENTIA]) | set(vocabulary.pools[Group.CONTROL])
    if not any(w in class_words for w in words):
        words[rng.integers(length)] = _class_word(vocabulary, group, delta, rng)
    if group == Group.DEMENTIA and rng.random() < 0.3 * delta:
        j = int(rng.integers(len(words)))
        words.insert(j, words[j])
    return words


def sample_investigator_sentence(spec: SynthSpec, vocabulary: _Vocabulary, rng: np.random.Generator) -> List[str]:
    """
    Investigator speech is labeled control. A stock prompt with probability delta, otherwise a sentence of
    a group drawn uniformly, so at delta 0 it cannot be told apart from participant speech.
    """
    if rng.random() < spec.separability:
        return list(investigator_prompts[rng.integers(len(investigator_prompts))])
    group = Group.DEMENTIA if rng.random() < 0.5 else Group.CONTROL
    return sample_sentence(spec, vocabulary, group, rng)


def sample_timings(words: List[str], group: Group, delta: float, start_ms: int,
                   rng: np.random.Generator) -> List[Tuple[int, int]]:
    max_gap = 150. * (1. + 2. * delta) if group == Group.DEMENTIA else 150.
    timings = []
    t = start_ms
    for _ in words:
        duration = int(rng.integers(200, 601))
        timings.append((t, t + duration))
        t += duration + int(rng.uniform(0., max_gap))
    return timings


def _markup(word: str, rng: np.random.Generator, rate: float) -> str:
    if rng.random() >= rate:
        return word
    choice = int(rng.integers(3))
    if choice == 0:
        return "&=laughs " + word
    if choice == 1:
        return "(.) " + word
    return word + " [/] " + word


def tier_line(speaker: str, words: List[str], timings: List[Tuple[int, int]], bullet_mode: str,
              rng: np.random.Generator, markup_rate: float) -> str:
    """A *-tier; bullet_mode is 'word' (one bullet per word), 'utterance' (one bullet) or 'none'."""
    written = [_markup(w, rng, markup_rate) for w in words]
    if bullet_mode == "word":
        body = " ".join("{} {}{}_{}{}".format(w, BULLET, s, e, BULLET) for w, (s, e) in zip(written, timings))
        body += " ."
    elif bullet_mode == "utterance":
        body = "{} . {}{}_{}{}".format(" ".join(written), BULLET, timings[0][0], timings[-1][1], BULLET)
    else:
        body = " ".join(written) + " ."
    return "*{}:\t{}".format(speaker, body)


def sample_audio(n_words: int, label: Group, spec: SynthSpec, direction: np.ndarray,
                 rng: np.random.Generator) -> np.ndarray:
    n_frames = 2 * n_words + int(rng.integers(0, 3))
    sign = 1. if label == Group.DEMENTIA else -1.
    frames = spec.noise_scale * rng.normal(size=(n_frames, spec.dim_a))
    return frames + spec.separability * spec.audio_signal * sign * direction[None, :]


def word_vectors(spec: SynthSpec, vocabulary: _Vocabulary, rng: np.random.Generator) -> Dict[str, np.ndarray]:
    direction = rng.normal(size=spec.dim_w)
    direction /= np.linalg.norm(direction)
    signs = [(w, 0.) for w in vocabulary.shared + short_responses
             + sorted({w for p in investigator_prompts for w in p})]
    signs += [(w, 1.) for w in vocabulary.pools[Group.DEMENTIA]]
    signs += [(w, -1.) for w in vocabulary.pools[Group.CONTROL]]
    vectors = {}
    for w, sign in signs:
        v = spec.noise_scale * rng.normal(size=spec.dim_w) + spec.separability * spec.word_signal * sign * direction
        if w not in vocabulary.oov and w not in vectors:
            vectors[w] = v.astype(np.float32).astype(np.float64)
    return {w: vectors[w] for w in sorted(vectors)}


def lexicon_lines(spec: SynthSpec, vocabulary: _Vocabulary, rng: np.random.Generator) -> List[str]:
    """
    Synonyms stay inside the headword's own pool so replacement keeps the label. Some lists carry a word
    missing from the embeddings, a few a multi-word phrase the loader has to drop.
    """
    taken = set(vocabulary.shared) | set(vocabulary.pools[Group.DEMENTIA]) | set(vocabulary.pools[Group.CONTROL])
    lines = []
    for pool in [vocabulary.shared, vocabulary.pools[Group.DEMENTIA], vocabulary.pools[Group.CONTROL]]:
        for w in pool:
            if rng.random() >= spec.lexicon_coverage:
                continue
            others = [o for o in pool if o != w]
            k = int(rng.integers(1, 4))
            synonyms = [others[i] for i in rng.choice(len(others), size=min(k, len(others)), replace=False)]
            if rng.random() < 0.2:
                synonyms.extend(pseudo_words(1, rng, taken))
            if rng.random() < 0.1:
                synonyms.append(" ".join(others[i] for i in rng.choice(len(others), size=2, replace=False)))
            lines.append("{}\t{}".format(w, ",".join(synonyms)))
    return sorted(lines)


def _header(transcript_id: str, group: Group) -> List[str]:
    diagnosis = "ProbableAD" if group == Group.DEMENTIA else "Control"
    return ["@UTF8", "@PID:\tsynthetic/{}".format(transcript_id), "@Begin", "@Languages:\teng",
            "@Participants:\tPAR Participant, INV Investigator",
            "@ID:\teng|Synthetic|PAR|65;|female|{}||Participant|||".format(diagnosis),
            "@ID:\teng|Synthetic|INV|||||Investigator|||",
            "@Media:\t{}, audio".format(transcript_id)]


def generate_synthetic_corpus(spec: SynthSpec, output_dir: str, verbose: bool = False) -> GeneratedCorpus:
    """
    Write a synthetic corpus under output_dir. Everything is drawn from one generator seeded with
    spec.seed, in a fixed order, so the same spec gives byte-identical files.
    """
    spec.validate()
    try:
        ensure_directory(os.path.join(output_dir, TRANSCRIPT_DIR))
        ensure_directory(os.path.join(output_dir, AUDIO_DIR))
    except OSError as e:
        raise DataError("cannot write synthetic corpus to {}: {}".format(output_dir, e))
    rng = np.random.default_rng(spec.seed)
    vocabulary = _vocabulary(spec, rng)
    vectors = word_vectors(spec, vocabulary, rng)
    audio_direction = rng.normal(size=spec.dim_a)
    audio_direction /= np.linalg.norm(audio_direction)
    counts = {Group.CONTROL: 0, Group.DEMENTIA: 0}
    index_lines = ["# transcript_id\tgroup\ttranscript\taudio"]
    transcripts = [(group, i) for group in [Group.DEMENTIA, Group.CONTROL]
                   for i in range(spec.n_transcripts_per_group)]
    for group, i in tqdm(transcripts, disable=not verbose, desc="synthetic transcripts"):
        transcript_id = "{}{:03d}".format("D" if group == Group.DEMENTIA else "C", i)
        audio_dir = ensure_directory(os.path.join(output_dir, AUDIO_DIR, transcript_id))
        lines = _header(transcript_id, group)
        n_utterances = spec.participant_sentences + spec.investigator_sentences
        investigator_slots = set([0] + rng.choice(np.arange(1, n_utterances), size=spec.investigator_sentences - 1,
                                                  replace=False).tolist()) if spec.investigator_sentences > 0 \
            else set()
        clock = int(rng.integers(0, 2000))
        for index in range(n_utterances):
            if index in investigator_slots:
                speaker, label = "INV", Group.CONTROL
                words = sample_investigator_sentence(spec, vocabulary, rng)
            else:
                speaker, label = "PAR", group
                words = sample_sentence(spec, vocabulary, group, rng)
            timings = sample_timings(words, label, spec.separability, clock, rng)
            clock = timings[-1][1] + int(rng.integers(500, 1500))
            u = rng.random()
            if u < spec.missing_timestamp_rate:
                bullet_mode = "none"
            elif u < spec.missing_timestamp_rate + spec.utterance_bullet_rate:
                bullet_mode = "utterance"
            else:
                bullet_mode = "word"
            lines.append(tier_line(speaker, words, timings, bullet_mode, rng, spec.markup_rate))
            frames = sample_audio(len(words), label, spec, audio_direction, rng)
            save_audio_features(AudioFeatureSequence(frames),
                                os.path.join(audio_dir, "{}{}".format(index, AUDIO_FILE_SUFFIX)))
            counts[label] += 1
        lines.append("@End")
        with open(os.path.join(output_dir, TRANSCRIPT_DIR, transcript_id + ".cha"), "w", encoding="utf-8",
                  newline="\n") as f:
            f.write("\n".join(lines) + "\n")
        index_lines.append("\t".join([transcript_id, group.to_string(),
                                      "{}/{}.cha".format(TRANSCRIPT_DIR, transcript_id),
                                      "{}/{}".format(AUDIO_DIR, transcript_id)]))
    with open(os.path.join(output_dir, INDEX_FILE_NAME), "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(index_lines) + "\n")
    embedding_path = os.path.join(output_dir, EMBEDDING_FILE_NAME)
    save_word_embeddings(WordEmbeddingTable.from_dict(vectors), embedding_path)
    lexicon_path = os.path.join(output_dir, LEXICON_FILE_NAME)
    with open(lexicon_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lexicon_lines(spec, vocabulary, rng)) + "\n")
    logger.info("synthetic corpus in %s: %d transcripts, %d dementia and %d control sentences (delta=%.2f)",
                output_dir, len(transcripts), counts[Group.DEMENTIA], counts[Group.CONTROL], spec.separability)
    return GeneratedCorpus(root=output_dir, embedding_path=embedding_path, lexicon_path=lexicon_path,
                           counts=counts, n_transcripts=len(transcripts))
