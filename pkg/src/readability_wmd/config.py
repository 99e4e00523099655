"""
Configuration settings for readability-wmd runs
"""
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from readability_wmd.classifier import Hyperparameters
from readability_wmd.errors import ConfigError
from readability_wmd.features import FeatureConfig
from readability_wmd.postprocess import DEFAULT_WINDOW, CorrectionMode
from readability_wmd.utils import PathLike

logger = logging.getLogger(__name__)

ENV_PREFIX = "READABILITY_WMD_"

DEFAULT_LOG_LEVEL = "WARNING"
DEFAULT_OUTPUT_DIR = "out"
DEFAULT_FOLDS = 5

# Short environment names for the most common settings
ENV_SHORTHANDS = {
    f"{ENV_PREFIX}MAX_VOCAB": "embeddings.max_vocab",
    f"{ENV_PREFIX}OUTPUT_DIR": "run.output_dir",
}

# Keys whose values are filesystem paths
PATH_KEYS = ("corpus.path", "corpus.stopwords", "embeddings.path", "run.output_dir")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CorpusSection(_Section):
    path: Optional[Path] = Field(None, description="Leveled corpus, JSON Lines")
    levels: Optional[List[int]] = Field(None, description="Declared levels, easiest first")
    stopwords: Optional[Path] = Field(None, description="Optional stopword list, one per line")


class EmbeddingsSection(_Section):
    path: Optional[Path] = Field(None, description="fastText text .vec file")
    max_vocab: Optional[int] = Field(None, ge=1)
    normalize: bool = Field(False, description="Scale rows to unit length")


class EvalSection(_Section):
    k: int = Field(DEFAULT_FOLDS, ge=2, description="Cross-validation folds")


class PostprocessSection(_Section):
    window: int = Field(DEFAULT_WINDOW, ge=1, description="Neighbors per shelf side")
    mode: CorrectionMode = CorrectionMode.WMD


class RunSection(_Section):
    seed: Optional[int] = Field(None, description="Required; no wall-clock default")
    output_dir: Path = Field(Path(DEFAULT_OUTPUT_DIR))


class RunConfig(_Section):
    """Every setting a command needs, addressed by flat `section.key` names"""

    corpus: CorpusSection = Field(default_factory=CorpusSection)
    embeddings: EmbeddingsSection = Field(default_factory=EmbeddingsSection)
    features: FeatureConfig = Field(default_factory=FeatureConfig)
    classifier: Hyperparameters = Field(default_factory=Hyperparameters)
    eval: EvalSection = Field(default_factory=EvalSection)
    postprocess: PostprocessSection = Field(default_factory=PostprocessSection)
    run: RunSection = Field(default_factory=RunSection)

    @property
    def seed(self) -> int:
        if self.run.seed is None:
            raise ConfigError("run.seed", "a seed is required")
        return self.run.seed

    def get(self, key: str) -> Any:
        section, name = key.split(".", 1)
        return getattr(getattr(self, section), name)


def known_keys() -> List[str]:
    """All flat `section.key` names accepted by RunConfig"""
    keys = []
    for section, field in RunConfig.model_fields.items():
        keys.extend(f"{section}.{name}" for name in field.annotation.model_fields)
    return keys


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _set(raw: Dict[str, Dict[str, Any]], key: str, value: Any) -> None:
    if key not in known_keys():
        raise ConfigError(key, "unknown configuration key")
    section, name = key.split(".", 1)
    raw.setdefault(section, {})[name] = value


def _read_file(path: Path) -> Dict[str, Dict[str, Any]]:
    if not path.is_file():
        raise ConfigError("config", f"config file {path} not found")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be an object of sections")

    raw: Dict[str, Dict[str, Any]] = {}
    for section, values in data.items():
        if not isinstance(values, dict):
            raise ConfigError(section, "section must be an object")
        for name, value in values.items():
            key = f"{section}.{name}"
            if key in PATH_KEYS and isinstance(value, str) and not Path(value).is_absolute():
                value = str(path.parent / value)
            _set(raw, key, value)
    return raw


def get_log_level(verbose: bool = False, environ: Optional[Dict[str, str]] = None) -> int:
    """
    Logging level from READABILITY_WMD_LOG_LEVEL, raised to INFO by `verbose`

    Returns:
        int: A `logging` level constant
    """
    environ = os.environ if environ is None else environ
    name = environ.get(f"{ENV_PREFIX}LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        level = logging.WARNING
    return min(level, logging.INFO) if verbose else level


def _env_overrides(environ: Dict[str, str]) -> Dict[str, Any]:
    found = {key: _parse_value(environ[name]) for name, key in ENV_SHORTHANDS.items() if name in environ}
    for key in known_keys():
        name = ENV_PREFIX + key.replace(".", "_").upper()
        if name in environ:
            found[key] = _parse_value(environ[name])
    return found


def parse_overrides(pairs: Iterable[str]) -> Dict[str, Any]:
    """
    Parse `section.key=value` strings

    Values are read as JSON when possible and as plain strings otherwise, so
    `--set eval.k=3` gives an int and `--set postprocess.mode=vote-only` a string.
    """
    overrides = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(pair, "override must look like section.key=value")
        overrides[key.strip()] = _parse_value(value.strip())
    return overrides


def load_run_config(
    path: Optional[PathLike] = None,
    overrides: Optional[Dict[str, Any]] = None,
    environ: Optional[Dict[str, str]] = None,
) -> RunConfig:
    """
    Build a RunConfig from defaults, a JSON file, the environment and overrides

    Later sources win: defaults, then the file, then READABILITY_WMD_<SECTION>_<KEY>
    variables, then `overrides`. Relative paths in the file resolve against
    the file's directory.

    Args:
        path (Optional[PathLike]): JSON config file with one object per section
        overrides (Optional[Dict[str, Any]]): Flat `section.key` values
        environ (Optional[Dict[str, str]]): Environment to read, os.environ by default

    Returns:
        RunConfig: Validated configuration

    Raises:
        ConfigError: unknown key, bad value or unreadable file
    """
    raw = _read_file(Path(path)) if path is not None else {}
    env = _env_overrides(dict(os.environ) if environ is None else environ)
    for key, value in {**env, **(overrides or {})}.items():
        _set(raw, key, value)

    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        key = ".".join(str(part) for part in first["loc"][:2])
        raise ConfigError(key, first["msg"]) from exc
    logger.debug(f"Loaded run config: {config.model_dump(mode='json')}")
    return config


def require_paths(config: RunConfig, keys: Iterable[str]) -> None:
    """
    Check that the input paths under `keys` are set and exist

    Raises:
        ConfigError: naming the first missing key
    """
    for key in keys:
        value = config.get(key)
        if value is None:
            raise ConfigError(key, "missing required path")
        if not Path(value).exists():
            raise ConfigError(key, f"path {value} does not exist")
    if config.corpus.stopwords is not None and not config.corpus.stopwords.exists():
        raise ConfigError("corpus.stopwords", f"path {config.corpus.stopwords} does not exist")


def settings_hash_payload(config: RunConfig) -> Dict[str, Any]:
    """Config content that defines a run's results (the output location is excluded)"""
    return config.model_dump(mode="json", exclude={"run": {"output_dir"}})
