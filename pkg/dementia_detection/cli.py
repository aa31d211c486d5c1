"""
Command line entry point: dementia-detection <command> [options].

    synth     write a synthetic corpus (transcripts, index, embeddings, audio features, lexicon)
    prepare   parse, embed and condition the corpus, write summaries and the split manifest
    train     prepare, then train and evaluate every requested model kind over the runs
    evaluate  metrics of a checkpoint on the test (or validation) split of its run
    report    misclassified sentences of a checkpoint
    plot      SVG of ROC curve files

Exit codes: 0 success, 1 usage or configuration error, 2 data or format error, 3 numerical failure.
"""
import argparse
import csv
import logging
import os
import sys
import traceback
from typing import Any, Dict, List, Optional, Sequence, Tuple

from dementia_detection.augment.lexicon import SynonymLexicon, build_lexicon_from_wordnet, load_lexicon, \
    save_lexicon
from dementia_detection.augment.synonym_replacement import augment_dataset, write_augmentation_report
from dementia_detection.corpus.chat_model import Corpus
from dementia_detection.corpus.corpus_data_generator import generate_synthetic_corpus
from dementia_detection.corpus.corpus_loader import load_corpus, write_corpus_summary
from dementia_detection.dataset.conditions import ConditionKind, ConditionSpec, LabeledDataset, build_condition, \
    remove_shorts, write_condition_counts
from dementia_detection.dataset.split import manifest_rows, split, write_manifest
from dementia_detection.embeddings.embedding_utils import FeatureStore
from dementia_detection.embeddings.word_embeddings import load_word_embeddings
from dementia_detection.generic_tools.exceptions import DatasetError, DementiaDetectionError, UsageError
from dementia_detection.generic_tools.path_tools import ensure_directory
from dementia_detection.models.model_graph import ModelGraph, load_model
from dementia_detection.script_utils.json_format import RunConfig, apply_overrides, load_run_config, \
    save_run_config
from dementia_detection.train_eval.error_report import error_report, write_error_report
from dementia_detection.train_eval.experiment import run_experiment, usable_records
from dementia_detection.train_eval.metrics import METRIC_NAMES, MetricsReport
from dementia_detection.train_eval.plots.plot_roc import plot_roc_files
from dementia_detection.train_eval.trainer import evaluate

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
RUN_CONFIG_FILE = "run_config.json"


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError("{}: {}".format(self.prog, message))


class Prepared:
    corpus: Corpus
    dataset: LabeledDataset
    lexicon: Optional[SynonymLexicon]
    store: FeatureStore

    def __init__(self, corpus: Corpus, dataset: LabeledDataset, lexicon: Optional[SynonymLexicon],
                 store: FeatureStore):
        self.corpus = corpus
        self.dataset = dataset
        self.lexicon = lexicon
        self.store = store


def _config_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    names = {"corpus_root": "corpus_root", "embedding_file": "embedding_file", "embedding_format": "embedding_format",
             "lexicon": "lexicon", "output_dir": "output_dir", "condition": "condition", "models": "model_kinds",
             "threshold": "threshold", "n_runs": "split.n_runs", "split_seed": "split.seed",
             "split_mode": "split.mode", "by_transcript": "split.by_transcript", "epochs": "train.epochs",
             "batch_size": "train.batch_size", "patience": "train.patience", "learning_rate": "train.learning_rate",
             "seed": "train.seed", "replacements_per_word": "augmentation.replacements_per_word",
             "augmentation_stage": "augmentation.stage", "separability": "synth.separability",
             "synth_seed": "synth.seed", "n_transcripts": "synth.n_transcripts_per_group"}
    return {key: getattr(args, name) for name, key in names.items() if hasattr(args, name)}


def run_config(args: argparse.Namespace, check_paths: bool = True) -> RunConfig:
    config = load_run_config(json_path=args.config)
    apply_overrides(config, _config_overrides(args))
    config.train_config.verbose = args.verbose
    if getattr(args, "wordnet_lexicon", None) is not None:
        if args.lexicon is not None:
            raise UsageError("--lexicon and --wordnet-lexicon cannot be combined")
        config.lexicon = write_wordnet_lexicon(config, args.wordnet_lexicon)
    return config.validate(check_paths=check_paths)


def write_wordnet_lexicon(config: RunConfig, path: str) -> str:
    """Lexicon of the corpus vocabulary built from WordNet, saved to path for later runs."""
    config.check_corpus_root()
    corpus = load_corpus(config.corpus_root, index_file=config.index_file)
    lexicon = build_lexicon_from_wordnet(w for r in corpus.records for w in r.words)
    path = os.path.abspath(path)
    ensure_directory(os.path.dirname(path))
    save_lexicon(lexicon, path)
    logger.info("wordnet lexicon written to %s", path)
    return path


def prepare(config: RunConfig, write_outputs: bool = True) -> Prepared:
    corpus = load_corpus(config.corpus_root, index_file=config.index_file, verbose=config.train_config.verbose)
    lexicon = load_lexicon(config.lexicon) if config.lexicon is not None else None
    dataset = build_condition(corpus, config.condition_spec(), lexicon)
    store = FeatureStore(load_word_embeddings(config.embedding_file, config.embedding_format), corpus.audio_refs)
    logger.info("out of vocabulary rate %.4f over %d sentences", store.oov_rate(corpus.records), len(corpus))
    if write_outputs:
        write_preparation(config, corpus, dataset, lexicon)
    return Prepared(corpus=corpus, dataset=dataset, lexicon=lexicon, store=store)


def write_preparation(config: RunConfig, corpus: Corpus, dataset: LabeledDataset,
                      lexicon: Optional[SynonymLexicon]):
    output_dir = config.output_dir
    write_corpus_summary(corpus.records, os.path.join(output_dir, "corpus_summary.csv"))
    datasets = []
    for kind in ConditionKind:
        if kind == dataset.kind:
            datasets.append(dataset)
        elif not kind.is_augmented:
            datasets.append(build_condition(corpus, ConditionSpec(kind)))
        elif lexicon is not None:
            datasets.append(build_condition(corpus, ConditionSpec(kind, config.augmentation), lexicon))
    write_condition_counts(datasets, os.path.join(output_dir, "condition_counts.csv"))
    if lexicon is not None:
        base = remove_shorts(corpus.records) if dataset.kind.removes_shorts else list(corpus.records)
        write_augmentation_report(augment_dataset(base, lexicon, config.augmentation),
                                  os.path.join(output_dir, "augmentation_report.csv"))
    rows: List[List[str]] = []
    for run_index in range(config.split_plan.n_runs):
        rows.extend(manifest_rows(split(dataset, config.split_plan, run_index, lexicon=lexicon)))
    write_manifest(rows, os.path.join(output_dir, "manifest.csv"))
    save_run_config(config, os.path.join(output_dir, RUN_CONFIG_FILE))


def cmd_synth(args: argparse.Namespace) -> int:
    config = run_config(args, check_paths=False)
    # the corpus goes to corpus_root when the configuration names one
    destination = config.corpus_root if config.corpus_root is not None else config.output_dir
    generated = generate_synthetic_corpus(config.synth, destination, verbose=args.verbose)
    print("{} transcripts, {} sentences in {}".format(generated.n_transcripts, generated.n_sentences,
                                                      generated.root))
    return 0


def cmd_prepare(args: argparse.Namespace) -> int:
    config = run_config(args)
    prepared = prepare(config)
    print("{}: {} sentences, manifest in {}".format(prepared.dataset.kind.display_name, len(prepared.dataset),
                                                    os.path.join(config.output_dir, "manifest.csv")))
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    config = run_config(args)
    prepared = prepare(config)
    results = run_experiment(prepared.dataset, config.model_kinds, config.split_plan, config.train_config,
                             prepared.store, config.output_dir, lexicon=prepared.lexicon)
    for kind, result in results.items():
        aggregate = result.storage.aggregate("test")
        print("{}\t{}".format(kind.display_name, "\t".join(
            "{} {}".format(m, aggregate.formatted(m)) for m in METRIC_NAMES)))
    return 0


def checkpoint_records(args: argparse.Namespace) -> Tuple[RunConfig, Prepared, ModelGraph, list]:
    """The records of the checkpoint's run and split a model of its kind can read."""
    config = run_config(args)
    graph = load_model(args.checkpoint)
    prepared = prepare(config, write_outputs=False)
    if graph.dim_w != prepared.store.word_dim:
        raise DatasetError("checkpoint expects word vectors of dimension {}, the embeddings have {}".format(
            graph.dim_w, prepared.store.word_dim))
    if args.run < 0 or args.run >= config.split_plan.n_runs:
        raise UsageError("--run must lie in [0, {})".format(config.split_plan.n_runs))
    dataset_split = split(prepared.dataset, config.split_plan, args.run, lexicon=prepared.lexicon)
    records, excluded = usable_records(dataset_split.parts()[args.split], graph.kind, prepared.store)
    if len(excluded) > 0:
        logger.warning("%d sentences excluded (missing timestamps or audio)", len(excluded))
    if graph.kind.uses_audio and prepared.store.audio_dim != graph.dim_a:
        raise DatasetError("checkpoint expects audio features of dimension {}, the corpus has {}".format(
            graph.dim_a, prepared.store.audio_dim))
    return config, prepared, graph, records


def _write_report(report: MetricsReport, path: str):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["metric", "value"])
        for key, value in report.to_dict().items():
            writer.writerow([key, repr(value)])


def _stem(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def cmd_evaluate(args: argparse.Namespace) -> int:
    config, prepared, graph, records = checkpoint_records(args)
    report, _ = evaluate(graph, records, prepared.store, config.threshold, config.train_config.batch_size)
    path = os.path.join(config.output_dir, "evaluation_{}_{}.csv".format(_stem(args.checkpoint), args.split))
    _write_report(report, path)
    for m in METRIC_NAMES:
        print("{}\t{}".format(m, "n/a" if getattr(report, m) is None else "{:.4f}".format(report.value(m))))
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    config, prepared, graph, records = checkpoint_records(args)
    rows = error_report(graph, records, prepared.store, config.threshold, config.train_config.batch_size)
    path = os.path.join(config.output_dir, "report_{}_{}.csv".format(_stem(args.checkpoint), args.split))
    write_error_report(rows, path)
    print("{} rows written to {}".format(len(rows), path))
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    for label, area in plot_roc_files(args.roc_files, args.output, title=args.title):
        print("{}\tAUC={:.4f}".format(label, area))
    return 0


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=str, default=None, help="JSON run configuration")
    parser.add_argument("--log-level", type=str, default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="logging level")
    parser.add_argument("--verbose", action="store_true", help="progress bars")
    parser.add_argument("--output-dir", dest="output_dir", type=str, default=None, help="output directory")


def _add_corpus(parser: argparse.ArgumentParser):
    parser.add_argument("--corpus-root", dest="corpus_root", type=str, default=None)
    parser.add_argument("--embedding-file", dest="embedding_file", type=str, default=None)
    parser.add_argument("--embedding-format", dest="embedding_format", type=str, default=None,
                        help="binary or text")
    parser.add_argument("--lexicon", type=str, default=None)
    parser.add_argument("--wordnet-lexicon", dest="wordnet_lexicon", type=str, default=None,
                        help="build a lexicon of the corpus vocabulary from WordNet, write it here and use it")
    parser.add_argument("--condition", type=str, default=None,
                        help="Original, ShortsRemoved, OriginalAugmented or ShortsAugmented")
    parser.add_argument("--replacements-per-word", dest="replacements_per_word", type=int, default=None)
    parser.add_argument("--augmentation-stage", dest="augmentation_stage", type=str, default=None,
                        help="BeforeSplit or AfterSplit")
    parser.add_argument("--n-runs", dest="n_runs", type=int, default=None)
    parser.add_argument("--split-seed", dest="split_seed", type=int, default=None)
    parser.add_argument("--split-mode", dest="split_mode", type=str, default=None, help="Resplit or KFold")
    parser.add_argument("--by-transcript", dest="by_transcript", action="store_true", default=None,
                        help="keep the sentences of a transcript in one split")
    parser.add_argument("--threshold", type=float, default=None)


def _add_training(parser: argparse.ArgumentParser):
    parser.add_argument("--models", type=str, default=None,
                        help="comma separated model kinds: audio, text, audio+time, text+time, audio+text, "
                             "audio+text+time")
    parser.add_argument("--epochs", type=int, default=None)
    parser.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    parser.add_argument("--patience", type=int, default=None)
    parser.add_argument("--learning-rate", dest="learning_rate", type=float, default=None)
    parser.add_argument("--seed", type=int, default=None, help="training seed")


def _add_checkpoint(parser: argparse.ArgumentParser):
    parser.add_argument("--checkpoint", type=str, required=True)
    parser.add_argument("--run", type=int, default=0, help="run index the checkpoint was trained on")
    parser.add_argument("--split", type=str, default="test", choices=["test", "val"])


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="dementia-detection",
                            description="Dementia detection from speech transcripts, word timings and audio")
    subparsers = parser.add_subparsers(dest="command", parser_class=ArgumentParser)
    subparsers.required = True

    synth = subparsers.add_parser("synth", help="write a synthetic corpus")
    _add_common(synth)
    synth.add_argument("--corpus-root", dest="corpus_root", type=str, default=None, help="corpus destination")
    synth.add_argument("--separability", type=float, default=None, help="class separability in [0, 1]")
    synth.add_argument("--synth-seed", dest="synth_seed", type=int, default=None)
    synth.add_argument("--n-transcripts", dest="n_transcripts", type=int, default=None,
                       help="transcripts per group")
    synth.set_defaults(handler=cmd_synth)

    prepare_parser = subparsers.add_parser("prepare", help="parse and condition the corpus")
    _add_common(prepare_parser)
    _add_corpus(prepare_parser)
    prepare_parser.set_defaults(handler=cmd_prepare)

    train = subparsers.add_parser("train", help="train and evaluate the model kinds")
    _add_common(train)
    _add_corpus(train)
    _add_training(train)
    train.set_defaults(handler=cmd_train)

    for name, handler, help_text in [("evaluate", cmd_evaluate, "metrics of a checkpoint"),
                                     ("report", cmd_report, "misclassified sentences of a checkpoint")]:
        sub = subparsers.add_parser(name, help=help_text)
        _add_common(sub)
        _add_corpus(sub)
        _add_checkpoint(sub)
        sub.set_defaults(handler=handler)

    plot = subparsers.add_parser("plot", help="plot ROC curve files")
    plot.add_argument("roc_files", nargs="+", help="roc_<kind>_<run>.csv files")
    plot.add_argument("--output", type=str, default="roc.svg")
    plot.add_argument("--title", type=str, default="ROC")
    plot.add_argument("--log-level", type=str, default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    plot.set_defaults(handler=cmd_plot)
    return parser


def failing_module(error: BaseException) -> str:
    frames = traceback.extract_tb(error.__traceback__)
    if len(frames) == 0:
        return "cli"
    return os.path.splitext(os.path.basename(frames[-1].filename))[0]


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print("error: {}".format(e), file=sys.stderr)
        return e.exit_code
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)
    try:
        return args.handler(args)
    except DementiaDetectionError as e:
        print("error in {}: {}".format(failing_module(e), e), file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print("error in {}: {}".format(failing_module(e), e), file=sys.stderr)
        return DementiaDetectionError.exit_code


if __name__ == "__main__":
    sys.exit(main())
