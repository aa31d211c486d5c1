"""
Train / validation / test splitting.

Resplit mode draws n_runs independent splits, the shuffle of run r being keyed by (seed, r). KFold mode
keeps the test split of run 0 and rotates the validation fold over a n_runs-fold partition of the rest.
"""
import csv
import logging
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.model_selection import GroupShuffleSplit, KFold, StratifiedKFold, train_test_split

from dementia_detection.augment.lexicon import SynonymLexicon
from dementia_detection.augment.synonym_replacement import augment_splits
from dementia_detection.corpus.chat_model import SentenceRecord
from dementia_detection.dataset.conditions import LabeledDataset
from dementia_detection.generic_tools.exceptions import ConfigError, DatasetError

logger = logging.getLogger(__name__)

MIN_DATASET_SIZE = 5
SPLIT_NAMES = ("train", "val", "test")


class SplitMode(Enum):
    RESPLIT = 0
    KFOLD = 1

    @staticmethod
    def from_string(value: str) -> "SplitMode":
        key = value.strip().lower().replace("_", "").replace("-", "")
        if key == "resplit":
            return SplitMode.RESPLIT
        if key == "kfold":
            return SplitMode.KFOLD
        raise ConfigError("split.mode", "'{}' is not one of Resplit, KFold".format(value))


class SplitPlan:
    test_fraction: float
    val_fraction_of_train: float
    n_runs: int
    seed: int
    stratified: bool
    by_transcript: bool
    mode: SplitMode

    def __init__(self, test_fraction: float = 0.2, val_fraction_of_train: float = 0.2, n_runs: int = 5,
                 seed: int = 0, stratified: bool = True, by_transcript: bool = False,
                 mode: SplitMode = SplitMode.RESPLIT):
        self.test_fraction = test_fraction
        self.val_fraction_of_train = val_fraction_of_train
        self.n_runs = n_runs
        self.seed = seed
        self.stratified = stratified
        self.by_transcript = by_transcript
        self.mode = mode

    @staticmethod
    def default():
        return SplitPlan(test_fraction=0.2, val_fraction_of_train=0.2, n_runs=5, seed=0, stratified=True,
                         by_transcript=False, mode=SplitMode.RESPLIT)

    def validate(self):
        for name in ["test_fraction", "val_fraction_of_train"]:
            value = getattr(self, name)
            if not 0. < value < 1.:
                raise ConfigError("split." + name, "must lie strictly between 0 and 1, got {}".format(value))
        if not isinstance(self.n_runs, int) or self.n_runs < 1:
            raise ConfigError("split.n_runs", "must be an integer >= 1")
        if self.seed < 0:
            raise ConfigError("split.seed", "must be non negative")
        if self.mode == SplitMode.KFOLD and self.n_runs < 2:
            raise ConfigError("split.n_runs", "KFold mode needs at least 2 folds")
        if self.mode == SplitMode.KFOLD and self.by_transcript:
            raise ConfigError("split.by_transcript", "not available in KFold mode")
        return self


class DatasetSplit:
    train: List[SentenceRecord]
    val: List[SentenceRecord]
    test: List[SentenceRecord]
    run_index: int

    def __init__(self, train: List[SentenceRecord], val: List[SentenceRecord], test: List[SentenceRecord],
                 run_index: int):
        self.train = train
        self.val = val
        self.test = test
        self.run_index = run_index

    def parts(self) -> Dict[str, List[SentenceRecord]]:
        return {"train": self.train, "val": self.val, "test": self.test}

    def sizes(self) -> Tuple[int, int, int]:
        return len(self.train), len(self.val), len(self.test)


def derive_seed(seed: int, run_index: int) -> int:
    return int(np.random.SeedSequence([seed, run_index]).generate_state(1)[0])


def split_sizes(n: int, plan: SplitPlan) -> Tuple[int, int, int]:
    n_test = int(np.floor(n * plan.test_fraction + 1e-9))
    n_val = int(np.floor((n - n_test) * plan.val_fraction_of_train + 1e-9))
    return n - n_test - n_val, n_val, n_test


def _can_stratify(labels: np.ndarray, n_take: int) -> bool:
    values, counts = np.unique(labels, return_counts=True)
    return counts.min() >= 2 and len(values) <= n_take and len(values) <= len(labels) - n_take


def _take(indices: np.ndarray, labels: np.ndarray, n_take: int, random_state: int,
          stratified: bool) -> Tuple[np.ndarray, np.ndarray]:
    """Split indices into (rest, taken) with exactly n_take taken."""
    if n_take == 0:
        return indices, indices[:0]
    if stratified:
        if _can_stratify(labels[indices], n_take):
            rest, taken = train_test_split(indices, test_size=n_take, random_state=random_state,
                                           stratify=labels[indices])
            return rest, taken
        logger.warning("stratified split infeasible for %d items (%d taken), shuffling without stratification",
                       len(indices), n_take)
    rest, taken = train_test_split(indices, test_size=n_take, random_state=random_state, shuffle=True)
    return rest, taken


def _take_groups(indices: np.ndarray, groups: np.ndarray, fraction: float,
                 random_state: int) -> Tuple[np.ndarray, np.ndarray]:
    if len(np.unique(groups[indices])) < 2:
        raise DatasetError("splitting by transcript needs at least 2 transcripts per partition")
    splitter = GroupShuffleSplit(n_splits=1, test_size=fraction, random_state=random_state)
    rest, taken = next(splitter.split(indices, groups=groups[indices]))
    return indices[rest], indices[taken]


def split_indices(labels: Sequence[int], plan: SplitPlan, run_index: int,
                  groups: Optional[Sequence[str]] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sorted (train, val, test) index arrays over a dataset of the given labels."""
    plan.validate()
    labels = np.asarray(labels)
    n = len(labels)
    if n < MIN_DATASET_SIZE:
        raise DatasetError("dataset of {} items is smaller than {}".format(n, MIN_DATASET_SIZE))
    if not 0 <= run_index < plan.n_runs:
        raise DatasetError("run index {} outside [0, {})".format(run_index, plan.n_runs))
    indices = np.arange(n)
    if plan.by_transcript:
        if groups is None:
            raise DatasetError("splitting by transcript needs transcript ids")
        groups = np.asarray(groups)
        state = derive_seed(plan.seed, run_index)
        rest, test = _take_groups(indices, groups, plan.test_fraction, state)
        train, val = _take_groups(rest, groups, plan.val_fraction_of_train, state)
        return np.sort(train), np.sort(val), np.sort(test)
    n_train, n_val, n_test = split_sizes(n, plan)
    if plan.mode == SplitMode.RESPLIT:
        state = derive_seed(plan.seed, run_index)
        rest, test = _take(indices, labels, n_test, state, plan.stratified)
        train, val = _take(rest, labels, n_val, state, plan.stratified)
        return np.sort(train), np.sort(val), np.sort(test)
    state = derive_seed(plan.seed, 0)
    rest, test = _take(indices, labels, n_test, state, plan.stratified)
    rest = np.sort(rest)
    values, counts = np.unique(labels[rest], return_counts=True)
    if len(rest) < plan.n_runs:
        raise DatasetError("{} items cannot fill {} folds".format(len(rest), plan.n_runs))
    if plan.stratified and counts.min() >= plan.n_runs:
        folds = StratifiedKFold(n_splits=plan.n_runs, shuffle=True, random_state=state)
    else:
        if plan.stratified:
            logger.warning("stratified folds infeasible, using plain folds")
        folds = KFold(n_splits=plan.n_runs, shuffle=True, random_state=state)
    train, val = list(folds.split(rest, labels[rest]))[run_index]
    return np.sort(rest[train]), np.sort(rest[val]), np.sort(test)


def split(dataset: LabeledDataset, plan: SplitPlan, run_index: int,
          lexicon: Optional[SynonymLexicon] = None) -> DatasetSplit:
    train, val, test = split_indices(dataset.labels, plan, run_index,
                                     groups=[r.transcript_id for r in dataset.records])
    records = dataset.records
    result = DatasetSplit(train=[records[i] for i in train], val=[records[i] for i in val],
                          test=[records[i] for i in test], run_index=run_index)
    if dataset.pending_augmentation is not None:
        if lexicon is None:
            raise ConfigError("lexicon", "augmentation after split needs a synonym lexicon")
        parts = augment_splits(result.parts(), lexicon, dataset.pending_augmentation)
        result = DatasetSplit(train=parts["train"], val=parts["val"], test=parts["test"], run_index=run_index)
    logger.info("run %d: train %d, val %d, test %d", run_index, *result.sizes())
    return result


def manifest_rows(split_result: DatasetSplit) -> List[List[str]]:
    rows = []
    for name, records in split_result.parts().items():
        for r in records:
            rows.append([r.record_id, r.label.to_string(), name, str(split_result.run_index),
                         r.provenance.to_string()])
    return rows


def write_manifest(rows: Sequence[Sequence[str]], path: str):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["record_id", "label", "split", "run_index", "provenance"])
        writer.writerows(rows)
