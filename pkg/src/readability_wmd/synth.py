"""
Synthetic leveled corpora with matching word vectors

Each class owns a vocabulary of pseudo-words whose vectors sit around a class
centroid far from the others. Documents mostly draw words from their own
class, so WMD separates classes. Surface style (sentence length) grows with
the level. A `noise` fraction of each class instead writes run-on sentences
whose length is drawn from one range shared by every level, so the noise
carries no label. Word shapes and document ids are class independent.
"""
import logging
from pathlib import Path
from typing import Dict, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from readability_wmd.corpus import meta_path_for, save_corpus
from readability_wmd.domain_types import Document, LeveledCorpus
from readability_wmd.embeddings import EmbeddingTable, save_vec
from readability_wmd.utils import PathLike, write_json

logger = logging.getLogger(__name__)

CONSONANTS = "bcdfghjklmnprstvz"
VOWELS = "aeiou"

CORPUS_FILE = "corpus.jsonl"
EMBEDDINGS_FILE = "embeddings.vec"
CONFIG_FILE = "config.json"

# Surface features written into fixture configs; sentence length is the only style signal
SYNTH_FEATURES = ["mean_sentence_length"]


class SynthSpec(BaseModel):
    """Shape of a synthetic fixture"""

    model_config = ConfigDict(frozen=True)

    n_classes: int = Field(3, ge=2, description="Number of levels")
    docs_per_class: int = Field(30, ge=1)
    vocab_per_class: int = Field(40, ge=1)
    dim: int = Field(16, ge=1, description="Embedding dimensionality")
    noise: float = Field(0.0, ge=0.0, lt=1.0, description="Fraction of each class with label-independent style")
    seed: int
    in_class_rate: float = Field(0.85, gt=0.0, le=1.0, description="Share of tokens from the document's own class")
    style_jitter: int = Field(1, ge=0, description="Sentence length spread around the target length")
    noise_min_length: int = Field(20, ge=1, description="Shortest target sentence length of noisy documents")
    noise_max_length: int = Field(32, ge=1, description="Longest target sentence length of noisy documents")
    centroid_scale: float = Field(10.0, gt=0.0, description="Norm of the class centroids")
    word_spread: float = Field(1.0, ge=0.0, description="Standard deviation of words around their centroid")
    min_sentences: int = Field(4, ge=1)
    max_sentences: int = Field(6, ge=1)


class SynthFixture(BaseModel):
    """Generated corpus, vectors and which documents received noisy style"""

    model_config = ConfigDict(frozen=True)

    spec: SynthSpec
    corpus: LeveledCorpus
    table: EmbeddingTable
    noisy_ids: List[str] = Field(default_factory=list, description="Documents written with label-independent style")


def _pseudo_word(index: int, rng: np.random.Generator) -> str:
    # Length and letter pattern depend on the index only, never on the class
    length = 3 + index % 7
    letters = []
    for position in range(length):
        pool = CONSONANTS if (position + index) % 2 == 0 else VOWELS
        letters.append(pool[int(rng.integers(len(pool)))])
    return "".join(letters)


def _vocabularies(spec: SynthSpec, rng: np.random.Generator) -> List[List[str]]:
    seen = set()
    vocabularies = []
    for _ in range(spec.n_classes):
        words: List[str] = []
        while len(words) < spec.vocab_per_class:
            word = _pseudo_word(len(words), rng)
            if word not in seen:
                seen.add(word)
                words.append(word)
        vocabularies.append(words)
    return vocabularies


def _style_length(level: int) -> int:
    return 5 + 4 * level


def _sentence_length(target: int, spec: SynthSpec, rng: np.random.Generator) -> int:
    return max(1, target + int(rng.integers(-spec.style_jitter, spec.style_jitter + 1)))


def generate_fixture(spec: SynthSpec) -> SynthFixture:
    """
    Generate a corpus and embedding table from a single seeded generator

    Every class gets the same number of noisy documents,
    round(noise * docs_per_class). A noisy document draws one target sentence
    length uniformly from [noise_min_length, noise_max_length], whatever its
    level.

    Args:
        spec (SynthSpec): Fixture shape and seed

    Returns:
        SynthFixture: Deterministic for a fixed spec
    """
    if spec.max_sentences < spec.min_sentences:
        raise ValueError("max_sentences must be at least min_sentences")
    if spec.noise_max_length < spec.noise_min_length:
        raise ValueError("noise_max_length must be at least noise_min_length")
    rng = np.random.default_rng(spec.seed)
    vocabularies = _vocabularies(spec, rng)

    centroids = rng.normal(size=(spec.n_classes, spec.dim))
    centroids *= spec.centroid_scale / np.linalg.norm(centroids, axis=1, keepdims=True)
    tokens: List[str] = []
    vectors = []
    for level, words in enumerate(vocabularies):
        for word in words:
            tokens.append(word)
            vectors.append(centroids[level] + spec.word_spread * rng.normal(size=spec.dim))
    table = EmbeddingTable.from_vectors(tokens, vectors)

    n_noisy = int(round(spec.noise * spec.docs_per_class))
    numbers = rng.permutation(spec.n_classes * spec.docs_per_class)
    documents: List[Document] = []
    noisy_ids: List[str] = []
    for level in range(spec.n_classes):
        others = [w for other, words in enumerate(vocabularies) if other != level for w in words]
        noisy = set(rng.choice(spec.docs_per_class, size=n_noisy, replace=False).tolist())
        for index in range(spec.docs_per_class):
            doc_id = f"doc-{int(numbers[level * spec.docs_per_class + index]):03d}"
            if index in noisy:
                target = int(rng.integers(spec.noise_min_length, spec.noise_max_length + 1))
                noisy_ids.append(doc_id)
            else:
                target = _style_length(level)
            sentences = []
            for _ in range(int(rng.integers(spec.min_sentences, spec.max_sentences + 1))):
                words = []
                for _ in range(_sentence_length(target, spec, rng)):
                    if not others or rng.random() < spec.in_class_rate:
                        words.append(vocabularies[level][int(rng.integers(spec.vocab_per_class))])
                    else:
                        words.append(others[int(rng.integers(len(others)))])
                sentences.append(" ".join(words).capitalize() + ".")
            documents.append(Document(id=doc_id, text=" ".join(sentences), level=level))

    documents.sort(key=lambda doc: doc.id)
    corpus = LeveledCorpus(documents=documents, levels=list(range(spec.n_classes)), language_tag="und")
    fixture = SynthFixture(spec=spec, corpus=corpus, table=table, noisy_ids=sorted(noisy_ids))
    logger.info(f"Generated {len(documents)} synthetic documents, {len(noisy_ids)} with noisy style")
    return fixture


def write_fixture(fixture: SynthFixture, out_dir: PathLike) -> Dict[str, Path]:
    """
    Write the fixture files plus a ready-to-use run config

    Paths in config.json are relative to `out_dir`.

    Args:
        fixture (SynthFixture): Generated fixture
        out_dir (PathLike): Destination directory, created if needed

    Returns:
        Dict[str, Path]: Written files keyed by role
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "corpus": out_dir / CORPUS_FILE,
        "meta": meta_path_for(out_dir / CORPUS_FILE),
        "embeddings": out_dir / EMBEDDINGS_FILE,
        "config": out_dir / CONFIG_FILE,
    }
    save_corpus(fixture.corpus, paths["corpus"])
    save_vec(fixture.table, paths["embeddings"])
    write_json(
        paths["config"],
        {
            "corpus": {"path": CORPUS_FILE, "levels": fixture.corpus.levels},
            "embeddings": {"path": EMBEDDINGS_FILE},
            "features": {"enabled": SYNTH_FEATURES},
            "run": {"seed": fixture.spec.seed, "output_dir": "out"},
        },
    )
    return paths
