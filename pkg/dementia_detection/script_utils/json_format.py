"""
JSON run configuration.

Top level keys:
    corpus_root       directory holding index.tsv, the transcripts and audio feature directories
    index_file        index file name inside corpus_root (default index.tsv)
    embedding_file    pretrained word vectors
    embedding_format  "binary" (word2vec .bin) or "text"
    lexicon           synonym lexicon, needed by the augmented conditions
    output_dir        where every output file is written
    condition         Original, ShortsRemoved, OriginalAugmented or ShortsAugmented
    model_kinds       list among audio, text, audio+time, text+time, audio+text, audio+text+time
    threshold         decision threshold on the dementia probability
    split             {test_fraction, val_fraction_of_train, n_runs, seed, stratified, by_transcript, mode}
    train             {epochs, batch_size, patience, learning_rate, beta1, beta2, epsilon, seed, restore_best}
    augmentation      {replacements_per_word, seed, stage}
    synth             SynthSpec fields, read by the synth command

Relative paths are read from the directory of the configuration file.
"""
import json
import logging
import os
from typing import Any, Dict, List, Optional

from dementia_detection.augment.synonym_replacement import AugmentationConfig, AugmentationStage
from dementia_detection.corpus.corpus_data_generator import SynthSpec
from dementia_detection.corpus.corpus_loader import INDEX_FILE_NAME
from dementia_detection.dataset.conditions import ConditionKind, ConditionSpec
from dementia_detection.dataset.split import SplitMode, SplitPlan
from dementia_detection.embeddings.word_embeddings import EmbeddingFormat
from dementia_detection.generic_tools.exceptions import ConfigError
from dementia_detection.generic_tools.path_tools import ensure_directory, resolve_from_root
from dementia_detection.models.model_graph import ModelKind
from dementia_detection.train_eval.trainer import TrainConfig

logger = logging.getLogger(__name__)

path_keys = ["corpus_root", "embedding_file", "lexicon", "output_dir"]
section_keys = ["split", "train", "augmentation", "synth"]


class RunConfig:
    corpus_root: Optional[str]
    index_file: str
    embedding_file: Optional[str]
    embedding_format: EmbeddingFormat
    lexicon: Optional[str]
    output_dir: str
    condition: ConditionKind
    model_kinds: List[ModelKind]
    threshold: float
    split_plan: SplitPlan
    train_config: TrainConfig
    augmentation: AugmentationConfig
    synth: SynthSpec

    def __init__(self, corpus_root: Optional[str] = None, index_file: str = INDEX_FILE_NAME,
                 embedding_file: Optional[str] = None,
                 embedding_format: EmbeddingFormat = EmbeddingFormat.BINARY,
                 lexicon: Optional[str] = None, output_dir: str = "output",
                 condition: ConditionKind = ConditionKind.ORIGINAL,
                 model_kinds: Optional[List[ModelKind]] = None, threshold: float = 0.5,
                 split_plan: Optional[SplitPlan] = None, train_config: Optional[TrainConfig] = None,
                 augmentation: Optional[AugmentationConfig] = None, synth: Optional[SynthSpec] = None):
        self.corpus_root = corpus_root
        self.index_file = index_file
        self.embedding_file = embedding_file
        self.embedding_format = embedding_format
        self.lexicon = lexicon
        self.output_dir = output_dir
        self.condition = condition
        self.model_kinds = model_kinds if model_kinds is not None else list(ModelKind)
        self.threshold = threshold
        self.split_plan = split_plan if split_plan is not None else SplitPlan.default()
        self.train_config = train_config if train_config is not None else TrainConfig.default()
        self.augmentation = augmentation if augmentation is not None else AugmentationConfig.default()
        self.synth = synth if synth is not None else SynthSpec.default()

    @staticmethod
    def default():
        return RunConfig()

    def condition_spec(self) -> ConditionSpec:
        return ConditionSpec(kind=self.condition,
                             augmentation=self.augmentation if self.condition.is_augmented else None)

    def validate(self, check_paths: bool = True):
        if not 0. < self.threshold < 1.:
            raise ConfigError("threshold", "must lie strictly between 0 and 1, got {}".format(self.threshold))
        if len(self.model_kinds) == 0:
            raise ConfigError("model_kinds", "at least one model kind is needed")
        if len(set(self.model_kinds)) != len(self.model_kinds):
            raise ConfigError("model_kinds", "a model kind is listed twice")
        self.train_config.threshold = self.threshold
        self.split_plan.validate()
        self.train_config.validate()
        self.augmentation.validate()
        self.synth.validate()
        self.condition_spec().validate()
        if not check_paths:
            return self
        self.check_corpus_root()
        if self.embedding_file is None or not os.path.isfile(self.embedding_file):
            raise ConfigError("embedding_file", "file not found: {}".format(self.embedding_file))
        if self.condition.is_augmented and (self.lexicon is None or not os.path.isfile(self.lexicon)):
            raise ConfigError("lexicon", "condition {} needs a lexicon file, not found: {}".format(
                self.condition.display_name, self.lexicon))
        self.check_output_dir()
        return self

    def check_corpus_root(self):
        if self.corpus_root is None or not os.path.isdir(self.corpus_root):
            raise ConfigError("corpus_root", "directory not found: {}".format(self.corpus_root))
        if not os.path.exists(os.path.join(self.corpus_root, self.index_file)):
            raise ConfigError("index_file", "{} not found in {}".format(self.index_file, self.corpus_root))

    def check_output_dir(self):
        try:
            ensure_directory(self.output_dir)
        except OSError as e:
            raise ConfigError("output_dir", "cannot create {}: {}".format(self.output_dir, e))
        if not os.access(self.output_dir, os.W_OK):
            raise ConfigError("output_dir", "{} is not writable".format(self.output_dir))

    def to_dict(self) -> Dict[str, Any]:
        return {"corpus_root": self.corpus_root,
                "index_file": self.index_file,
                "embedding_file": self.embedding_file,
                "embedding_format": self.embedding_format,
                "lexicon": self.lexicon,
                "output_dir": self.output_dir,
                "condition": self.condition,
                "model_kinds": self.model_kinds,
                "threshold": self.threshold,
                "split": vars(self.split_plan),
                "train": {k: v for k, v in vars(self.train_config).items() if k not in {"threshold", "verbose"}},
                "augmentation": vars(self.augmentation),
                "synth": vars(self.synth)}


class RunConfigEncoder(json.JSONEncoder):
    def default(self, z):
        if isinstance(z, ModelKind):
            return z.cli_name
        if isinstance(z, ConditionKind):
            return z.display_name
        if isinstance(z, (SplitMode, AugmentationStage, EmbeddingFormat)):
            return "".join(part.capitalize() for part in z.name.split("_"))
        return super().default(z)


def _typed(field: str, default_value: Any, value: Any) -> Any:
    """value checked against the type of the default; ints are accepted for floats, bools never for numbers."""
    expected = type(default_value)
    if expected is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, expected) and (expected is bool or not isinstance(value, bool)):
        return value
    raise ConfigError(field, "expected {}, got {!r}".format(expected.__name__, value))


def _section(cls, default, values: Any, prefix: str, converters: Optional[Dict] = None):
    if not isinstance(values, dict):
        raise ConfigError(prefix, "expected an object")
    kwargs = dict(vars(default))
    for key, value in values.items():
        if key not in kwargs or key in {"threshold", "verbose"} and prefix == "train":
            raise ConfigError("{}.{}".format(prefix, key), "unknown key")
        if converters is not None and key in converters and isinstance(value, str):
            value = converters[key](value)
        kwargs[key] = _typed("{}.{}".format(prefix, key), kwargs[key], value)
    return cls(**kwargs)


def _model_kinds(value: Any) -> List[ModelKind]:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip() != ""]
    if not isinstance(value, list):
        raise ConfigError("model_kinds", "expected a list of model kind names")
    return [ModelKind.from_string(v) for v in value]


def config_from_dict(dict_config: Dict[str, Any], base_dir: str = ".") -> RunConfig:
    """Build a RunConfig from parsed JSON; relative paths resolve against base_dir."""
    known = set(path_keys) | set(section_keys) | {"index_file", "embedding_format", "condition", "model_kinds",
                                                  "threshold"}
    for key in dict_config:
        if key not in known:
            raise ConfigError(key, "unknown key")
    config = RunConfig.default()
    for key in path_keys:
        if dict_config.get(key) is not None:
            setattr(config, key, resolve_from_root(base_dir, dict_config[key]))
    if "index_file" in dict_config:
        config.index_file = dict_config["index_file"]
    if "embedding_format" in dict_config:
        config.embedding_format = EmbeddingFormat.from_string(dict_config["embedding_format"])
    if "condition" in dict_config:
        config.condition = ConditionKind.from_string(dict_config["condition"])
    if "model_kinds" in dict_config:
        config.model_kinds = _model_kinds(dict_config["model_kinds"])
    if "threshold" in dict_config:
        config.threshold = _typed("threshold", config.threshold, dict_config["threshold"])
    if "split" in dict_config:
        config.split_plan = _section(SplitPlan, SplitPlan.default(), dict_config["split"], "split",
                                     {"mode": SplitMode.from_string})
    if "train" in dict_config:
        config.train_config = _section(TrainConfig, TrainConfig.default(), dict_config["train"], "train")
    if "augmentation" in dict_config:
        config.augmentation = _section(AugmentationConfig, AugmentationConfig.default(),
                                       dict_config["augmentation"], "augmentation",
                                       {"stage": AugmentationStage.from_string})
    if "synth" in dict_config:
        config.synth = _section(SynthSpec, SynthSpec.default(), dict_config["synth"], "synth")
    return config


def load_run_config(json_path: Optional[str] = None, dict_config: Optional[Dict[str, Any]] = None,
                    base_dir: Optional[str] = None) -> RunConfig:
    if dict_config is None:
        if json_path is None:
            return RunConfig.default()
        try:
            with open(json_path, "r", encoding="utf-8") as f:
                dict_config = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError("config", "cannot read {}: {}".format(json_path, e))
        if not isinstance(dict_config, dict):
            raise ConfigError("config", "{} does not hold a JSON object".format(json_path))
    if base_dir is None:
        base_dir = os.path.dirname(os.path.abspath(json_path)) if json_path is not None else os.getcwd()
    return config_from_dict(dict_config, base_dir=base_dir)


def apply_overrides(config: RunConfig, overrides: Dict[str, Any]) -> RunConfig:
    """
    Command line values win over the file. Keys are top level names or dotted section names
    ("train.epochs", "split.n_runs"); None values are ignored.
    """
    sections = {"split": config.split_plan, "train": config.train_config, "augmentation": config.augmentation,
                "synth": config.synth}
    for key, value in overrides.items():
        if value is None:
            continue
        if "." in key:
            section, name = key.split(".", 1)
            if section not in sections or not hasattr(sections[section], name):
                raise ConfigError(key, "unknown key")
            if section == "split" and name == "mode" and isinstance(value, str):
                value = SplitMode.from_string(value)
            if section == "augmentation" and name == "stage" and isinstance(value, str):
                value = AugmentationStage.from_string(value)
            setattr(sections[section], name, _typed(key, getattr(sections[section], name), value))
        elif key in path_keys:
            setattr(config, key, os.path.abspath(value))
        elif key == "model_kinds":
            config.model_kinds = _model_kinds(value)
        elif key == "condition":
            config.condition = ConditionKind.from_string(value)
        elif key == "embedding_format":
            config.embedding_format = EmbeddingFormat.from_string(value)
        elif key in {"threshold", "index_file"}:
            setattr(config, key, _typed(key, getattr(config, key), value))
        else:
            raise ConfigError(key, "unknown key")
    return config


def save_run_config(config: RunConfig, path: str):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config.to_dict(), f, cls=RunConfigEncoder, indent=2, sort_keys=True)
