"""
Tests for surface feature extraction and standardization
"""
import numpy as np
import pytest
from pydantic import ValidationError

from readability_wmd import features
from readability_wmd.domain_types import Document, FeatureVector
from readability_wmd.errors import FeatureError
from readability_wmd.features import (
    FeatureConfig,
    extract_features,
    fit_scaler,
    register_feature,
    split_sentences,
    transform,
)


def _features(text, **config):
    fv = extract_features(Document(id="doc", text=text, level=0), FeatureConfig(**config))
    return dict(zip(fv.names, fv.values))


def _fv(values, names=None):
    names = names or [f"f{i}" for i in range(len(values))]
    return FeatureVector(values=values, names=names)


def test_two_sentence_text():
    """Hand-counted values for a short two-sentence text"""
    values = _features("The cat sat. The cat ran.")

    assert values["token_count"] == 6
    assert values["sentence_count"] == 2
    assert values["mean_sentence_length"] == 3
    assert values["type_token_ratio"] == pytest.approx(4 / 6)
    assert values["hapax_ratio"] == pytest.approx(0.5)


def test_one_word_text():
    """A single word is one token in one sentence"""
    values = _features("hi")

    assert values["token_count"] == 1
    assert values["sentence_count"] == 1
    assert values["type_token_ratio"] == 1


def test_doubled_text():
    """Concatenating a text with itself doubles the token count and keeps mean word length"""
    text = "Reading is fun. Longer words appear occasionally!"
    once = _features(text)
    twice = _features(text + " " + text)

    assert twice["token_count"] == 2 * once["token_count"]
    assert twice["mean_word_length"] == pytest.approx(once["mean_word_length"])
    assert twice["sentence_count"] == 2 * once["sentence_count"]


def test_long_word_ratio():
    """Words of 7 or more letters count as long"""
    assert _features("Elephants are enormous")["long_word_ratio"] == pytest.approx(2 / 3)


def test_syllable_estimate():
    """Vowel groups approximate syllables; extra vowels extend the set"""
    assert _features("banana")["mean_syllables"] == 3
    assert _features("rhythm")["mean_syllables"] == 0
    assert _features("rhythm", extra_vowels="y")["mean_syllables"] == 1


def test_hapax_ratio():
    """Share of distinct words occurring once"""
    assert _features("a a b c")["hapax_ratio"] == pytest.approx(2 / 3)


def test_split_sentences_without_terminator():
    """Text with no sentence punctuation is one sentence"""
    assert split_sentences("no full stop here") == [["no", "full", "stop", "here"]]
    assert split_sentences("Done. Next one? Yes!") == [["done"], ["next", "one"], ["yes"]]


def test_empty_text_raises():
    """No tokens means no features"""
    with pytest.raises(FeatureError):
        extract_features(Document(id="empty", text=" ... ", level=0))


def test_enabled_subset_keeps_order():
    """Values follow the enabled order"""
    fv = extract_features(
        Document(id="d", text="One two three.", level=0),
        FeatureConfig(enabled=["sentence_count", "token_count"]),
    )

    assert fv.names == ["sentence_count", "token_count"]
    assert fv.values == [1.0, 3.0]


def test_unknown_feature_rejected():
    """Config validation lists unknown feature names"""
    with pytest.raises(ValidationError):
        FeatureConfig(enabled=["token_count", "no_such_feature"])


def test_register_duplicate_name():
    """A name can be registered only once"""
    with pytest.raises(ValueError):
        register_feature("token_count")(lambda profile: 0.0)


def test_register_custom_provider(monkeypatch):
    """A registered provider can be enabled by name"""
    monkeypatch.setattr(features, "FEATURE_PROVIDERS", dict(features.FEATURE_PROVIDERS))

    @register_feature("question_share")
    def _question_share(profile):
        return sum(1 for s in profile.sentences if s[0] in {"who", "what", "why"}) / len(profile.sentences)

    values = _features("Why now? It is late.", enabled=["question_share"])
    assert values == {"question_share": 0.5}


def test_scaler_two_points():
    """Values {0, 2} give mean 1 and population stddev 1"""
    scaler = fit_scaler([_fv([0.0]), _fv([2.0])])

    assert scaler.means == [1.0]
    assert scaler.stddevs == [1.0]
    assert transform(scaler, _fv([2.0])).values == [1.0]


def test_scaler_single_vector_is_constant():
    """One vector leaves every feature constant, which maps to 0"""
    scaler = fit_scaler([_fv([3.0, -1.0])])

    assert scaler.stddevs == [0.0, 0.0]
    assert transform(scaler, _fv([7.0, 9.0])).values == [0.0, 0.0]


def test_scaler_matches_two_pass_oracle():
    """Means and stddevs agree with explicit two-pass loops"""
    rng = np.random.default_rng(5)
    matrix = rng.normal(loc=3.0, scale=2.0, size=(100, 8))
    scaler = fit_scaler([_fv(row.tolist()) for row in matrix])

    for column in range(8):
        values = [float(v) for v in matrix[:, column]]
        mean = sum(values) / len(values)
        variance = sum((v - mean) ** 2 for v in values) / len(values)
        assert scaler.means[column] == pytest.approx(mean, abs=1e-10)
        assert scaler.stddevs[column] == pytest.approx(variance ** 0.5, abs=1e-10)


def test_transform_mean_is_zero():
    """The fitted mean maps to the zero vector"""
    vectors = [_fv([1.0, 10.0]), _fv([3.0, 30.0]), _fv([5.0, 20.0])]
    scaler = fit_scaler(vectors)

    assert transform(scaler, _fv(scaler.means)).values == pytest.approx([0.0, 0.0])


def test_transform_arity_mismatch():
    """Vectors must have the scaler's length"""
    scaler = fit_scaler([_fv([0.0, 1.0]), _fv([1.0, 0.0])])

    with pytest.raises(FeatureError):
        transform(scaler, _fv([1.0]))


def test_fit_scaler_inconsistent_order():
    """All vectors must share one feature order"""
    with pytest.raises(FeatureError):
        fit_scaler([_fv([0.0, 1.0], ["a", "b"]), _fv([1.0, 0.0], ["b", "a"])])
