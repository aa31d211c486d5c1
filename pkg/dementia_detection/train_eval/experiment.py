"""
Repeated-split experiment: every run splits the condition's dataset once, then trains and evaluates each
requested model kind on it. Per-run files are written as soon as a run ends so an interrupted experiment
keeps what it finished.

Output directory content:
    epochs_<kind>_<run>.csv, checkpoint_<kind>_<run>.ckpt, roc_<kind>_<run>.csv (test split),
    errors_<kind>.csv (test split misclassifications), excluded_<kind>.csv,
    metrics.csv (per run and aggregate rows), table_validation.csv, table_test.csv (mean±std).
"""
import csv
import logging
import os
from typing import Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from dementia_detection.augment.lexicon import SynonymLexicon
from dementia_detection.corpus.chat_model import SentenceRecord
from dementia_detection.dataset.conditions import LabeledDataset
from dementia_detection.dataset.split import DatasetSplit, SplitPlan, derive_seed, manifest_rows, split, \
    write_manifest
from dementia_detection.embeddings.embedding_utils import FeatureStore
from dementia_detection.generic_tools.exceptions import DatasetError
from dementia_detection.generic_tools.path_tools import ensure_directory
from dementia_detection.generic_tools.result_storage.result_storage import RunResultStorage
from dementia_detection.models.model_graph import ModelKind, build_model, save_model
from dementia_detection.train_eval.error_report import ERROR_REPORT_HEADER, error_rows
from dementia_detection.train_eval.metrics import METRIC_NAMES, RocCurve, roc_curve
from dementia_detection.train_eval.plots.plot_roc import write_roc_csv
from dementia_detection.train_eval.trainer import EpochLog, TrainConfig, evaluate, train, write_epoch_logs

logger = logging.getLogger(__name__)

SPLIT_TABLES = {"val": "table_validation.csv", "test": "table_test.csv"}


class ExperimentResult:
    kind: ModelKind
    storage: RunResultStorage
    roc_curves: Dict[int, RocCurve]
    epoch_logs: Dict[int, List[EpochLog]]

    def __init__(self, kind: ModelKind):
        self.kind = kind
        self.storage = RunResultStorage()
        self.roc_curves = {}
        self.epoch_logs = {}
        self.error_rows: List[List[str]] = []


def exclusion_reason(record: SentenceRecord, kind: ModelKind, store: FeatureStore) -> Optional[str]:
    if kind.uses_time and not record.has_timestamps:
        return "no_timestamps"
    if kind.uses_audio and not store.has_audio(record):
        return "no_audio"
    return None


def usable_records(records: Sequence[SentenceRecord], kind: ModelKind,
                   store: FeatureStore) -> Tuple[List[SentenceRecord], List[Tuple[str, str]]]:
    kept, excluded = [], []
    for r in records:
        reason = exclusion_reason(r, kind, store)
        if reason is None:
            kept.append(r)
        else:
            excluded.append((r.record_id, reason))
    return kept, excluded


def run_train_config(config: TrainConfig, run_index: int) -> TrainConfig:
    run_config = TrainConfig(**vars(config))
    run_config.seed = derive_seed(config.seed, run_index)
    return run_config


def artifact_name(prefix: str, kind: ModelKind, run_index: Optional[int] = None, extension: str = "csv") -> str:
    if run_index is None:
        return "{}_{}.{}".format(prefix, kind.cli_name, extension)
    return "{}_{}_{}.{}".format(prefix, kind.cli_name, run_index, extension)


def run_single(kind: ModelKind, dataset_split: DatasetSplit, store: FeatureStore, config: TrainConfig,
               output_dir: str, result: ExperimentResult) -> List[Tuple[str, str]]:
    """Train and evaluate one kind on one split; returns the excluded (record id, reason) pairs."""
    run_index = dataset_split.run_index
    parts = {}
    excluded: List[Tuple[str, str]] = []
    for name, records in dataset_split.parts().items():
        parts[name], ex = usable_records(records, kind, store)
        excluded.extend(ex)
    if len(excluded) > 0:
        logger.warning("%s run %d: %d sentences excluded (missing timestamps or audio)", kind.display_name,
                       run_index, len(excluded))
    if len(parts["test"]) == 0:
        raise DatasetError("{} run {}: no usable test sentence".format(kind.display_name, run_index))
    run_config = run_train_config(config, run_index)
    graph = build_model(kind, store.word_dim, store.audio_dim or 0, run_config.seed)
    graph, logs = train(graph, parts["train"], parts["val"], store, run_config)
    result.epoch_logs[run_index] = logs
    write_epoch_logs(logs, os.path.join(output_dir, artifact_name("epochs", kind, run_index)))
    save_model(graph, os.path.join(output_dir, artifact_name("checkpoint", kind, run_index, "ckpt")))
    for name in ["val", "test"]:
        report, probs = evaluate(graph, parts[name], store, config.threshold, config.batch_size)
        result.storage.add_report(run_index, name, report)
        if name != "test":
            continue
        if not report.auroc_undefined:
            curve = roc_curve(probs, [r.binary_label for r in parts[name]])
            result.roc_curves[run_index] = curve
            write_roc_csv(curve, os.path.join(output_dir, artifact_name("roc", kind, run_index)))
        for row in error_rows(parts[name], probs, config.threshold):
            result.error_rows.append([str(run_index)] + row)
    logger.info("%s run %d: test accuracy %.4f, auroc %s", kind.display_name, run_index,
                result.storage.map_reports[(run_index, "test")].accuracy,
                result.storage.map_reports[(run_index, "test")].auroc)
    return excluded


def write_metrics(results: Sequence[ExperimentResult], path: str):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["model", "split", "run"] + METRIC_NAMES + ["tp", "fp", "tn", "fn", "n"])
        for result in results:
            for split_name in ["val", "test"]:
                for run_index in result.storage.run_indices():
                    report = result.storage.map_reports.get((run_index, split_name))
                    if report is None:
                        continue
                    writer.writerow([result.kind.display_name, split_name, run_index]
                                    + [repr(report.value(m)) for m in METRIC_NAMES]
                                    + [report.tp, report.fp, report.tn, report.fn, report.n])
                if len(result.storage.get_reports(split_name)) == 0:
                    continue
                aggregate = result.storage.aggregate(split_name)
                writer.writerow([result.kind.display_name, split_name, "mean"]
                                + [repr(aggregate.mean[m]) for m in METRIC_NAMES] + [""] * 5)
                writer.writerow([result.kind.display_name, split_name, "std"]
                                + [repr(aggregate.std[m]) for m in METRIC_NAMES] + [""] * 5)


def write_tables(results: Sequence[ExperimentResult], output_dir: str):
    for split_name, file_name in SPLIT_TABLES.items():
        with open(os.path.join(output_dir, file_name), "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["model"] + METRIC_NAMES)
            for result in results:
                if len(result.storage.get_reports(split_name)) == 0:
                    continue
                aggregate = result.storage.aggregate(split_name)
                writer.writerow([result.kind.display_name] + [aggregate.formatted(m) for m in METRIC_NAMES])


def write_error_file(result: ExperimentResult, output_dir: str):
    with open(os.path.join(output_dir, artifact_name("errors", result.kind)), "w", newline="",
              encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["run"] + ERROR_REPORT_HEADER)
        writer.writerows(result.error_rows)


def write_excluded(kind: ModelKind, excluded: Sequence[Tuple[int, str, str]], output_dir: str):
    with open(os.path.join(output_dir, artifact_name("excluded", kind)), "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["run", "record_id", "reason"])
        writer.writerows(excluded)


def run_experiment(dataset: LabeledDataset,
                   kinds: Sequence[ModelKind],
                   plan: SplitPlan,
                   config: TrainConfig,
                   store: FeatureStore,
                   output_dir: str,
                   lexicon: Optional[SynonymLexicon] = None) -> Dict[ModelKind, ExperimentResult]:
    plan.validate()
    config.validate()
    ensure_directory(output_dir)
    results = {kind: ExperimentResult(kind) for kind in kinds}
    excluded: Dict[ModelKind, List[Tuple[int, str, str]]] = {kind: [] for kind in kinds}
    manifest: List[List[str]] = []
    try:
        for run_index in tqdm(range(plan.n_runs), disable=not config.verbose, desc="runs"):
            dataset_split = split(dataset, plan, run_index, lexicon=lexicon)
            manifest.extend(manifest_rows(dataset_split))
            write_manifest(manifest, os.path.join(output_dir, "manifest.csv"))
            for kind in kinds:
                ex = run_single(kind, dataset_split, store, config, output_dir, results[kind])
                excluded[kind].extend((run_index, record_id, reason) for record_id, reason in ex)
                write_excluded(kind, excluded[kind], output_dir)
                write_error_file(results[kind], output_dir)
            write_metrics(list(results.values()), os.path.join(output_dir, "metrics.csv"))
    finally:
        write_metrics(list(results.values()), os.path.join(output_dir, "metrics.csv"))
    write_tables(list(results.values()), output_dir)
    for kind in kinds:
        logger.info("%s test: %s", kind.display_name, ", ".join(
            "{} {}".format(m, results[kind].storage.aggregate("test").formatted(m)) for m in METRIC_NAMES))
    return results
