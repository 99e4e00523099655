"""
Tests for run configuration loading
"""
import json
import logging
from pathlib import Path

import pytest

from readability_wmd.config import (
    get_log_level,
    known_keys,
    load_run_config,
    parse_overrides,
    require_paths,
    settings_hash_payload,
)
from readability_wmd.errors import ConfigError
from readability_wmd.postprocess import CorrectionMode
from readability_wmd.utils import canonical_hash


@pytest.fixture
def config_file(tmp_path):
    """A config file in its own directory with relative paths"""
    directory = tmp_path / "conf"
    directory.mkdir()
    path = directory / "config.json"
    path.write_text(
        json.dumps(
            {
                "corpus": {"path": "data/corpus.jsonl", "levels": [0, 1, 2]},
                "eval": {"k": 3},
                "run": {"seed": 5},
            }
        ),
        encoding="utf-8",
    )
    return path


def test_defaults():
    """Without file, environment or overrides every default applies"""
    config = load_run_config(environ={})

    assert config.eval.k == 5
    assert config.postprocess.window == 3
    assert config.postprocess.mode is CorrectionMode.WMD
    assert config.classifier.l2 == 1.0
    assert config.run.output_dir == Path("out")
    assert config.run.seed is None


def test_missing_seed():
    """The seed has no default"""
    config = load_run_config(environ={})

    with pytest.raises(ConfigError) as info:
        _ = config.seed
    assert info.value.key == "run.seed"


def test_file_relative_paths(config_file):
    """Relative paths resolve against the config file's directory"""
    config = load_run_config(config_file, environ={})

    assert config.corpus.path == config_file.parent / "data" / "corpus.jsonl"
    assert config.corpus.levels == [0, 1, 2]
    assert config.seed == 5


def test_precedence(config_file):
    """Defaults < file < environment < overrides"""
    environ = {"READABILITY_WMD_EVAL_K": "4", "READABILITY_WMD_POSTPROCESS_WINDOW": "2"}

    from_env = load_run_config(config_file, environ=environ)
    overridden = load_run_config(config_file, {"eval.k": 7}, environ=environ)

    assert from_env.eval.k == 4
    assert from_env.postprocess.window == 2
    assert overridden.eval.k == 7
    assert overridden.postprocess.window == 2


def test_environment_shorthands():
    """Short variable names cover the common settings"""
    environ = {"READABILITY_WMD_MAX_VOCAB": "5000", "READABILITY_WMD_OUTPUT_DIR": "results"}

    config = load_run_config(environ=environ)

    assert config.embeddings.max_vocab == 5000
    assert config.run.output_dir == Path("results")


def test_unknown_key(tmp_path):
    """Keys outside the documented set are rejected by name"""
    with pytest.raises(ConfigError) as info:
        load_run_config(overrides={"eval.folds": 3}, environ={})
    assert info.value.key == "eval.folds"

    path = tmp_path / "config.json"
    path.write_text(json.dumps({"classifier": {"kernel": "rbf"}}), encoding="utf-8")
    with pytest.raises(ConfigError) as info:
        load_run_config(path, environ={})
    assert info.value.key == "classifier.kernel"


@pytest.mark.parametrize(
    "key, value",
    [("eval.k", 1), ("postprocess.window", 0), ("postprocess.mode", "fastest"), ("classifier.l2", -1)],
)
def test_invalid_values_name_the_key(key, value):
    """Range violations surface as ConfigError for that key"""
    with pytest.raises(ConfigError) as info:
        load_run_config(overrides={key: value}, environ={})

    assert info.value.key == key


def test_bad_config_files(tmp_path):
    """Missing files and invalid JSON are configuration errors"""
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "absent.json", environ={})

    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(path, environ={})


def test_parse_overrides():
    """Values parse as JSON when they can and stay strings otherwise"""
    overrides = parse_overrides(["eval.k=3", "postprocess.mode=vote-only", "corpus.levels=[0,1]"])

    assert overrides == {"eval.k": 3, "postprocess.mode": "vote-only", "corpus.levels": [0, 1]}
    with pytest.raises(ConfigError):
        parse_overrides(["eval.k"])


def test_require_paths(tmp_path):
    """Input paths must be set and exist"""
    corpus = tmp_path / "corpus.jsonl"
    corpus.write_text("", encoding="utf-8")

    with pytest.raises(ConfigError) as info:
        require_paths(load_run_config(environ={}), ["corpus.path"])
    assert info.value.key == "corpus.path"

    missing = load_run_config(overrides={"embeddings.path": str(tmp_path / "nope.vec")}, environ={})
    with pytest.raises(ConfigError) as info:
        require_paths(missing, ["embeddings.path"])
    assert info.value.key == "embeddings.path"

    require_paths(load_run_config(overrides={"corpus.path": str(corpus)}, environ={}), ["corpus.path"])


def test_hash_ignores_output_dir():
    """Where results go does not change the settings hash"""
    a = load_run_config(overrides={"run.seed": 1, "run.output_dir": "a"}, environ={})
    b = load_run_config(overrides={"run.seed": 1, "run.output_dir": "b"}, environ={})
    c = load_run_config(overrides={"run.seed": 2}, environ={})

    assert canonical_hash(settings_hash_payload(a)) == canonical_hash(settings_hash_payload(b))
    assert canonical_hash(settings_hash_payload(a)) != canonical_hash(settings_hash_payload(c))


def test_known_keys():
    """Every documented key is accepted"""
    for key in ["corpus.stopwords", "embeddings.normalize", "features.extra_vowels", "classifier.tol", "run.output_dir"]:
        assert key in known_keys()


def test_log_level():
    """Level from the environment, raised to INFO by verbose"""
    assert get_log_level(environ={}) == logging.WARNING
    assert get_log_level(environ={"READABILITY_WMD_LOG_LEVEL": "debug"}) == logging.DEBUG
    assert get_log_level(True, environ={}) == logging.INFO
    assert get_log_level(True, environ={"READABILITY_WMD_LOG_LEVEL": "DEBUG"}) == logging.DEBUG
    assert get_log_level(environ={"READABILITY_WMD_LOG_LEVEL": "chatty"}) == logging.WARNING
