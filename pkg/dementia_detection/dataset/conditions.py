import csv
import logging
from enum import Enum
from typing import Dict, List, Optional, Sequence, Union

from dementia_detection.augment.lexicon import SynonymLexicon
from dementia_detection.augment.synonym_replacement import AugmentationConfig, AugmentationStage, \
    augment_dataset
from dementia_detection.corpus.chat_model import Corpus, Group, SentenceRecord
from dementia_detection.generic_tools.exceptions import ConfigError, DatasetError

logger = logging.getLogger(__name__)

MIN_TOKENS_SHORTS_REMOVED = 2


class ConditionKind(Enum):
    ORIGINAL = 0
    SHORTS_REMOVED = 1
    ORIGINAL_AUGMENTED = 2
    SHORTS_AUGMENTED = 3

    @staticmethod
    def from_string(value: str) -> "ConditionKind":
        key = value.strip().lower().replace("_", "").replace("-", "").replace(" ", "")
        for kind in ConditionKind:
            if kind.name.lower().replace("_", "") == key:
                return kind
        raise ConfigError("condition", "'{}' is not one of {}".format(
            value, ", ".join(k.display_name for k in ConditionKind)))

    @property
    def display_name(self) -> str:
        return "".join(part.capitalize() for part in self.name.split("_"))

    @property
    def is_augmented(self) -> bool:
        return self in {ConditionKind.ORIGINAL_AUGMENTED, ConditionKind.SHORTS_AUGMENTED}

    @property
    def removes_shorts(self) -> bool:
        return self in {ConditionKind.SHORTS_REMOVED, ConditionKind.SHORTS_AUGMENTED}


class ConditionSpec:
    kind: ConditionKind
    augmentation: Optional[AugmentationConfig]

    def __init__(self, kind: ConditionKind, augmentation: Optional[AugmentationConfig] = None):
        self.kind = kind
        self.augmentation = augmentation

    @staticmethod
    def default():
        return ConditionSpec(kind=ConditionKind.ORIGINAL)

    def validate(self):
        if self.kind.is_augmented and self.augmentation is None:
            raise ConfigError("augmentation", "condition {} needs an augmentation configuration".format(
                self.kind.display_name))
        if not self.kind.is_augmented and self.augmentation is not None:
            raise ConfigError("augmentation", "condition {} takes no augmentation".format(
                self.kind.display_name))
        if self.augmentation is not None:
            self.augmentation.validate()
        return self


class LabeledDataset:
    """
    Sentence records of one experimental condition. When augmentation is deferred to after the split,
    records holds the originals and pending_augmentation the configuration to apply inside each split.
    """
    kind: ConditionKind
    records: List[SentenceRecord]
    pending_augmentation: Optional[AugmentationConfig]

    def __init__(self, kind: ConditionKind, records: List[SentenceRecord],
                 pending_augmentation: Optional[AugmentationConfig] = None):
        self.kind = kind
        self.records = records
        self.pending_augmentation = pending_augmentation

    def __len__(self):
        return len(self.records)

    @property
    def labels(self) -> List[int]:
        return [r.binary_label for r in self.records]


def condition_counts(records: Sequence[SentenceRecord]) -> Dict[Group, int]:
    counts = {Group.CONTROL: 0, Group.DEMENTIA: 0}
    for r in records:
        counts[r.label] += 1
    return counts


def remove_shorts(records: Sequence[SentenceRecord], min_tokens: int = MIN_TOKENS_SHORTS_REMOVED):
    return [r for r in records if len(r.tokens) >= min_tokens]


def build_condition(corpus: Union[Corpus, Sequence[SentenceRecord]],
                    spec: ConditionSpec,
                    lexicon: Optional[SynonymLexicon] = None) -> LabeledDataset:
    spec.validate()
    records = list(corpus.records) if isinstance(corpus, Corpus) else list(corpus)
    if spec.kind.removes_shorts:
        records = remove_shorts(records)
    pending = None
    if spec.kind.is_augmented:
        if lexicon is None:
            raise ConfigError("lexicon", "condition {} needs a synonym lexicon".format(spec.kind.display_name))
        if spec.augmentation.stage == AugmentationStage.BEFORE_SPLIT:
            records = augment_dataset(records, lexicon, spec.augmentation)
        else:
            pending = spec.augmentation
    if len(records) == 0:
        raise DatasetError("condition {} holds no sentence".format(spec.kind.display_name))
    counts = condition_counts(records)
    logger.info("condition %s: %d control and %d dementia datapoints%s", spec.kind.display_name,
                counts[Group.CONTROL], counts[Group.DEMENTIA],
                " (augmentation after split)" if pending is not None else "")
    return LabeledDataset(kind=spec.kind, records=records, pending_augmentation=pending)


def write_condition_counts(datasets: Sequence[LabeledDataset], path: str):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["condition", "control", "dementia"])
        for d in datasets:
            counts = condition_counts(d.records)
            writer.writerow([d.kind.display_name, counts[Group.CONTROL], counts[Group.DEMENTIA]])
