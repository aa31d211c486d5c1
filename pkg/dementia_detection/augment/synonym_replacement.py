import csv
import logging
from enum import Enum
from typing import Dict, List, Sequence

from dementia_detection.augment.lexicon import SynonymLexicon
from dementia_detection.corpus.chat_model import Provenance, SentenceRecord
from dementia_detection.generic_tools.exceptions import ConfigError, DatasetError

logger = logging.getLogger(__name__)


class AugmentationStage(Enum):
    BEFORE_SPLIT = 0
    AFTER_SPLIT = 1

    @staticmethod
    def from_string(value: str) -> "AugmentationStage":
        key = value.strip().lower().replace("_", "").replace("-", "")
        if key == "beforesplit":
            return AugmentationStage.BEFORE_SPLIT
        if key == "aftersplit":
            return AugmentationStage.AFTER_SPLIT
        raise ConfigError("augmentation.stage", "'{}' is not one of BeforeSplit, AfterSplit".format(value))


class AugmentationConfig:
    replacements_per_word: int
    seed: int
    stage: AugmentationStage

    def __init__(self, replacements_per_word: int = 1, seed: int = 0,
                 stage: AugmentationStage = AugmentationStage.BEFORE_SPLIT):
        self.replacements_per_word = replacements_per_word
        self.seed = seed
        self.stage = stage

    @staticmethod
    def default():
        return AugmentationConfig(replacements_per_word=1, seed=0, stage=AugmentationStage.BEFORE_SPLIT)

    def validate(self):
        if not isinstance(self.replacements_per_word, int) or self.replacements_per_word < 1:
            raise ConfigError("augmentation.replacements_per_word", "must be an integer >= 1")
        return self


def augment_sentence(record: SentenceRecord,
                     lexicon: SynonymLexicon,
                     config: AugmentationConfig) -> List[SentenceRecord]:
    """
    New sentences each replacing one word of the record by one of its synonyms: position by position,
    at most replacements_per_word synonyms per position taken in lexicon order. The replacing word keeps the
    timestamps of the word it replaces.
    """
    if not record.provenance.is_original:
        raise DatasetError("cannot augment the augmented record {}".format(record.record_id))
    seen = {tuple(record.words)}
    augmented = []
    for position, token in enumerate(record.tokens):
        for synonym in lexicon.synonyms(token.surface, config.seed)[:config.replacements_per_word]:
            tokens = record.tokens[:position] + (token.with_surface(synonym),) + record.tokens[position + 1:]
            key = tuple(t.surface for t in tokens)
            if key in seen:
                continue
            seen.add(key)
            augmented.append(SentenceRecord(transcript_id=record.transcript_id,
                                            index=record.index,
                                            tokens=tokens,
                                            label=record.label,
                                            speaker_role=record.speaker_role,
                                            provenance=Provenance.augmented(record.index, position, synonym)))
    return augmented


def augment_dataset(records: Sequence[SentenceRecord],
                    lexicon: SynonymLexicon,
                    config: AugmentationConfig) -> List[SentenceRecord]:
    """Originals in input order, each followed by its augmentations."""
    config.validate()
    output: List[SentenceRecord] = []
    n_new = 0
    for r in records:
        output.append(r)
        new = augment_sentence(r, lexicon, config)
        output.extend(new)
        n_new += len(new)
    logger.info("augmentation: %d originals, %d new sentences (%d per word)", len(records), n_new,
                config.replacements_per_word)
    return output


def augment_splits(parts: Dict[str, Sequence[SentenceRecord]],
                   lexicon: SynonymLexicon,
                   config: AugmentationConfig) -> Dict[str, List[SentenceRecord]]:
    """Augmentation applied inside each split, so no sentence shares a split with a variant of another."""
    return {name: augment_dataset(records, lexicon, config) for name, records in parts.items()}


def augmentation_report_rows(records: Sequence[SentenceRecord]) -> List[List[str]]:
    originals = {r.parent_id: r for r in records if r.provenance.is_original}
    rows = []
    for r in records:
        if r.provenance.is_original:
            continue
        position = r.provenance.replaced_position
        parent = originals.get(r.parent_id)
        original_word = parent.tokens[position].surface if parent is not None else ""
        rows.append([r.parent_id, str(position), original_word, r.provenance.synonym_used])
    return rows


def write_augmentation_report(records: Sequence[SentenceRecord], path: str):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["parent_id", "position", "original_word", "synonym"])
        writer.writerows(augmentation_report_rows(records))
