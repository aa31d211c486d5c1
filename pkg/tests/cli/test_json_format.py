import json
import os

import pytest

from dementia_detection.augment.synonym_replacement import AugmentationStage
from dementia_detection.dataset.conditions import ConditionKind
from dementia_detection.dataset.split import SplitMode
from dementia_detection.generic_tools.exceptions import ConfigError, UsageError
from dementia_detection.models.model_graph import ModelKind
from dementia_detection.script_utils.json_format import RunConfig, apply_overrides, load_run_config, \
    save_run_config

REPO_CONFIG = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))),
                           "configs", "synthetic_experiment.json")


def write_json(path, content):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(content, f)
    return path


def test_defaults():
    config = RunConfig.default().validate(check_paths=False)
    assert config.model_kinds == list(ModelKind)
    assert config.condition == ConditionKind.ORIGINAL
    assert config.split_plan.n_runs == 5
    assert config.train_config.epochs == 50


def test_repository_config_loads():
    config = load_run_config(json_path=REPO_CONFIG)
    assert config.condition == ConditionKind.ORIGINAL_AUGMENTED
    assert len(config.model_kinds) == 6
    assert os.path.isabs(config.corpus_root)
    config.validate(check_paths=False)


def test_relative_paths_follow_config_file(tmp_path):
    path = write_json(str(tmp_path / "run.json"), {"corpus_root": "corpus", "output_dir": "out",
                                                   "split": {"mode": "KFold", "n_runs": 3},
                                                   "augmentation": {"stage": "AfterSplit"},
                                                   "train": {"epochs": 5, "patience": 2},
                                                   "model_kinds": "text,audio+text"})
    config = load_run_config(json_path=path)
    assert config.corpus_root == os.path.join(str(tmp_path), "corpus")
    assert config.output_dir == os.path.join(str(tmp_path), "out")
    assert config.split_plan.mode == SplitMode.KFOLD
    assert config.augmentation.stage == AugmentationStage.AFTER_SPLIT
    assert config.train_config.epochs == 5
    assert config.model_kinds == [ModelKind.TEXT, ModelKind.AUDIO_TEXT]


@pytest.mark.parametrize("content, field", [({"corpora": "x"}, "corpora"),
                                            ({"train": {"epoch": 3}}, "train.epoch"),
                                            ({"train": {"threshold": 0.3}}, "train.threshold"),
                                            ({"split": {"mode": "Bootstrap"}}, "split.mode"),
                                            ({"condition": "Everything"}, "condition"),
                                            ({"embedding_format": "glove"}, "embedding_format"),
                                            ({"train": {"learning_rate": "abc"}}, "train.learning_rate"),
                                            ({"train": {"epochs": True}}, "train.epochs"),
                                            ({"split": {"n_runs": 2.5}}, "split.n_runs"),
                                            ({"split": {"stratified": "yes"}}, "split.stratified"),
                                            ({"split": {"mode": 3}}, "split.mode"),
                                            ({"threshold": "x"}, "threshold")])
def test_config_errors_name_the_field(tmp_path, content, field):
    path = write_json(str(tmp_path / "run.json"), content)
    with pytest.raises(ConfigError) as e:
        load_run_config(json_path=path)
    assert e.value.field == field
    assert field in str(e.value)


@pytest.mark.parametrize("content, field", [({"threshold": 1.2}, "threshold"),
                                            ({"train": {"epochs": 3, "patience": 5}}, "train.patience"),
                                            ({"split": {"test_fraction": 0.}}, "split.test_fraction"),
                                            ({"model_kinds": ["text", "text"]}, "model_kinds")])
def test_validation_errors(content, field):
    config = load_run_config(dict_config=content)
    with pytest.raises(ConfigError) as e:
        config.validate(check_paths=False)
    assert e.value.field == field


def test_unknown_model_kind():
    with pytest.raises(UsageError):
        load_run_config(dict_config={"model_kinds": ["video"]})


def test_unreadable_config(tmp_path):
    path = str(tmp_path / "broken.json")
    with open(path, "w", encoding="utf-8") as f:
        f.write("{not json")
    with pytest.raises(ConfigError):
        load_run_config(json_path=path)


def test_missing_paths(tmp_path):
    config = load_run_config(dict_config={"corpus_root": str(tmp_path / "nowhere")})
    with pytest.raises(ConfigError) as e:
        config.validate()
    assert e.value.field == "corpus_root"


def test_overrides_win(tmp_path):
    config = load_run_config(dict_config={"train": {"epochs": 30}, "split": {"n_runs": 4}, "threshold": 0.4})
    apply_overrides(config, {"train.epochs": 7, "split.n_runs": None, "split.mode": "kfold", "threshold": 0.6,
                             "model_kinds": "text", "condition": "ShortsRemoved",
                             "output_dir": str(tmp_path)})
    assert config.train_config.epochs == 7
    assert config.split_plan.n_runs == 4
    assert config.split_plan.mode == SplitMode.KFOLD
    assert config.model_kinds == [ModelKind.TEXT]
    assert config.condition == ConditionKind.SHORTS_REMOVED
    config.validate(check_paths=False)
    assert config.train_config.threshold == 0.6
    with pytest.raises(ConfigError) as e:
        apply_overrides(config, {"train.momentum": 0.9})
    assert e.value.field == "train.momentum"


def test_saved_config_reloads(tmp_path):
    config = load_run_config(dict_config={"condition": "ShortsAugmented", "model_kinds": ["audio+text+time"],
                                          "split": {"by_transcript": True}, "synth": {"separability": 0.2},
                                          "output_dir": str(tmp_path / "out")})
    path = str(tmp_path / "saved.json")
    save_run_config(config, path)
    again = load_run_config(json_path=path)
    assert again.to_dict() == config.to_dict()


def test_integers_accepted_for_floats():
    config = load_run_config(dict_config={"train": {"learning_rate": 1}, "synth": {"separability": 0},
                                          "threshold": 1})
    assert isinstance(config.train_config.learning_rate, float)
    assert isinstance(config.synth.separability, float)
    assert isinstance(config.threshold, float)


def test_override_of_wrong_type():
    config = RunConfig.default()
    with pytest.raises(ConfigError) as e:
        apply_overrides(config, {"train.epochs": "7"})
    assert e.value.field == "train.epochs"
    assert config.train_config.epochs == 50
