"""
Surface linguistic features and standardization
"""
import logging
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Sequence

import numpy as np
from pydantic import BaseModel, Field, field_validator

from readability_wmd.corpus import DEFAULT_POLICY, TokenizationPolicy, tokenize
from readability_wmd.domain_types import Document, FeatureVector
from readability_wmd.errors import FeatureError

logger = logging.getLogger(__name__)

BASE_VOWELS = "aeiou"
SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?])(?:\s+|$)")


@dataclass(frozen=True)
class TextProfile:
    """Token-level view of a document shared by all feature providers"""

    tokens: List[str]
    sentences: List[List[str]]
    vowel_pattern: re.Pattern


FeatureProvider = Callable[[TextProfile], float]
FEATURE_PROVIDERS: Dict[str, FeatureProvider] = {}


def register_feature(name: str) -> Callable[[FeatureProvider], FeatureProvider]:
    """
    Register a feature provider under `name`

    Providers receive a TextProfile and return one finite float. Enable them
    through `features.enabled` in the run config.
    """

    def decorator(func: FeatureProvider) -> FeatureProvider:
        if name in FEATURE_PROVIDERS:
            raise ValueError(f"feature {name!r} already registered")
        FEATURE_PROVIDERS[name] = func
        return func

    return decorator


@register_feature("token_count")
def _token_count(profile: TextProfile) -> float:
    return float(len(profile.tokens))


@register_feature("sentence_count")
def _sentence_count(profile: TextProfile) -> float:
    return float(len(profile.sentences))


@register_feature("mean_sentence_length")
def _mean_sentence_length(profile: TextProfile) -> float:
    return float(np.mean([len(sentence) for sentence in profile.sentences]))


@register_feature("mean_word_length")
def _mean_word_length(profile: TextProfile) -> float:
    return float(np.mean([len(token) for token in profile.tokens]))


@register_feature("type_token_ratio")
def _type_token_ratio(profile: TextProfile) -> float:
    return len(set(profile.tokens)) / len(profile.tokens)


@register_feature("long_word_ratio")
def _long_word_ratio(profile: TextProfile) -> float:
    return sum(1 for token in profile.tokens if len(token) >= 7) / len(profile.tokens)


@register_feature("mean_syllables")
def _mean_syllables(profile: TextProfile) -> float:
    return float(np.mean([len(profile.vowel_pattern.findall(t)) for t in profile.tokens]))


@register_feature("hapax_ratio")
def _hapax_ratio(profile: TextProfile) -> float:
    counts = Counter(profile.tokens)
    return sum(1 for count in counts.values() if count == 1) / len(counts)


DEFAULT_FEATURES = [
    "token_count",
    "sentence_count",
    "mean_sentence_length",
    "mean_word_length",
    "type_token_ratio",
    "long_word_ratio",
    "mean_syllables",
    "hapax_ratio",
]


class FeatureConfig(BaseModel):
    """The `features` section of the run config"""

    enabled: List[str] = Field(default_factory=lambda: list(DEFAULT_FEATURES))
    extra_vowels: str = Field("", description="Vowel letters beyond aeiou, e.g. 'äöüy'")

    @field_validator("enabled")
    @classmethod
    def _known_names(cls, names: List[str]) -> List[str]:
        if not names:
            raise ValueError("at least one feature must be enabled")
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        unknown = [name for name in names if name not in FEATURE_PROVIDERS]
        if unknown:
            raise ValueError(f"unknown features {unknown}; known: {sorted(FEATURE_PROVIDERS)}")
        return names


@lru_cache(maxsize=32)
def _vowel_pattern(extra_vowels: str) -> re.Pattern:
    letters = "".join(sorted(set(BASE_VOWELS + extra_vowels.lower())))
    return re.compile(f"[{re.escape(letters)}]+")


def split_sentences(text: str, policy: TokenizationPolicy = DEFAULT_POLICY) -> List[List[str]]:
    """
    Split on `.`, `!` or `?` followed by whitespace or end of text

    Segments without tokens are dropped; a text with tokens has at least one
    sentence.
    """
    sentences = [tokenize(part, policy) for part in SENTENCE_BOUNDARY.split(text)]
    sentences = [sentence for sentence in sentences if sentence]
    if not sentences:
        tokens = tokenize(text, policy)
        return [tokens] if tokens else []
    return sentences


def extract_features(
    doc: Document, config: FeatureConfig = FeatureConfig(), policy: TokenizationPolicy = DEFAULT_POLICY
) -> FeatureVector:
    """
    Compute the enabled surface features of one document

    Args:
        doc (Document): Source document
        config (FeatureConfig): Enabled features and vowel set
        policy (TokenizationPolicy): Tokenization switches

    Returns:
        FeatureVector: Values in `config.enabled` order

    Raises:
        FeatureError: when the text has no tokens
    """
    tokens = tokenize(doc.text, policy)
    if not tokens:
        raise FeatureError(f"document {doc.id!r} has an empty token stream")
    profile = TextProfile(
        tokens=tokens,
        sentences=split_sentences(doc.text, policy),
        vowel_pattern=_vowel_pattern(config.extra_vowels),
    )
    values = [FEATURE_PROVIDERS[name](profile) for name in config.enabled]
    return FeatureVector(values=values, names=list(config.enabled), doc_id=doc.id)


class Scaler(BaseModel):
    """Per-feature standardization fit on training data"""

    names: List[str]
    means: List[float]
    stddevs: List[float]

    def transform_matrix(self, matrix: np.ndarray) -> np.ndarray:
        """Standardize rows of `matrix`; constant features map to 0"""
        means = np.asarray(self.means)
        stddevs = np.asarray(self.stddevs)
        safe = np.where(stddevs > 0.0, stddevs, 1.0)
        return np.where(stddevs > 0.0, (matrix - means) / safe, 0.0)


def feature_matrix(features: Sequence[FeatureVector]) -> np.ndarray:
    """Stack feature vectors into a float64 matrix, checking consistent ordering"""
    if not features:
        raise FeatureError("no feature vectors given")
    names = features[0].names
    for fv in features[1:]:
        if fv.names != names:
            raise FeatureError(f"inconsistent feature ordering in {fv.doc_id!r}")
    return np.array([fv.values for fv in features], dtype=np.float64)


def fit_scaler(features: Sequence[FeatureVector]) -> Scaler:
    """
    Fit per-feature mean and population standard deviation

    Args:
        features (Sequence[FeatureVector]): Training vectors with identical ordering

    Returns:
        Scaler: Means and stddevs; stddev 0 marks a constant feature
    """
    matrix = feature_matrix(features)
    means = matrix.mean(axis=0)
    stddevs = np.sqrt(((matrix - means) ** 2).mean(axis=0))
    stddevs[np.ptp(matrix, axis=0) == 0.0] = 0.0
    return Scaler(names=list(features[0].names), means=means.tolist(), stddevs=stddevs.tolist())


def transform(scaler: Scaler, fv: FeatureVector) -> FeatureVector:
    """
    Standardize one feature vector

    Args:
        scaler (Scaler): Fitted scaler
        fv (FeatureVector): Vector with the scaler's arity

    Returns:
        FeatureVector: (value - mean) / stddev, 0 for constant features
    """
    if len(fv.values) != len(scaler.means):
        raise FeatureError(f"arity mismatch: {len(fv.values)} values, scaler expects {len(scaler.means)}")
    values = scaler.transform_matrix(np.asarray([fv.values], dtype=np.float64))[0]
    return FeatureVector(values=values.tolist(), names=list(fv.names), doc_id=fv.doc_id)
