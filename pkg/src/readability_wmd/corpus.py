"""
Leveled corpus loading, tokenization, nBOW construction and fold splitting
"""
import json
import logging
import unicodedata
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from pydantic import BaseModel, Field

from readability_wmd.domain_types import Document, FoldAssignment, LeveledCorpus, NBowVector
from readability_wmd.embeddings import EmbeddingTable
from readability_wmd.errors import (
    AllTokensDropped,
    CorpusFormatError,
    DuplicateDocumentError,
    EmptyCorpusError,
    FoldError,
    UnknownLevelError,
)
from readability_wmd.utils import PathLike, iter_jsonl, write_json, write_jsonl

logger = logging.getLogger(__name__)

CORPUS_KEYS = {"id", "text", "level"}


class TokenizationPolicy(BaseModel):
    """How raw text becomes tokens"""

    lowercase: bool = Field(True, description="Apply Unicode lowercasing")
    strip_punctuation: bool = Field(True, description="Strip leading/trailing punctuation")


DEFAULT_POLICY = TokenizationPolicy()


def _is_punct(char: str) -> bool:
    return unicodedata.category(char).startswith("P")


def _strip_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and _is_punct(token[start]):
        start += 1
    while end > start and _is_punct(token[end - 1]):
        end -= 1
    return token[start:end]


def tokenize(text: str, policy: TokenizationPolicy = DEFAULT_POLICY) -> List[str]:
    """
    Split text into tokens

    Default policy: Unicode-lowercase, split on whitespace, strip leading and
    trailing punctuation, drop empty results.

    Args:
        text (str): Input text
        policy (TokenizationPolicy): Tokenization switches

    Returns:
        List[str]: Tokens in text order (possibly empty)
    """
    if policy.lowercase:
        text = text.lower()
    tokens = text.split()
    if policy.strip_punctuation:
        tokens = [_strip_punct(token) for token in tokens]
    return [token for token in tokens if token]


def _read_meta(path: Path) -> Dict:
    meta_path = meta_path_for(path)
    if not meta_path.exists():
        return {}
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"invalid metadata file {meta_path}: {exc}") from exc
    if not isinstance(meta, dict):
        raise CorpusFormatError(f"metadata file {meta_path} must hold a JSON object")
    return meta


def meta_path_for(path: PathLike) -> Path:
    """Sidecar metadata path: same stem, `.meta.json`"""
    path = Path(path)
    return path.with_name(f"{path.stem}.meta.json")


def _parse_row(raw: object, line_no: int) -> Tuple[str, str, int]:
    if not isinstance(raw, dict) or set(raw) != CORPUS_KEYS:
        raise CorpusFormatError("expected an object with exactly the keys id, text, level", line_no)
    doc_id, text, level = raw["id"], raw["text"], raw["level"]
    if not isinstance(doc_id, str) or not doc_id:
        raise CorpusFormatError("id must be a nonempty string", line_no)
    if not isinstance(text, str):
        raise CorpusFormatError("text must be a string", line_no)
    if isinstance(level, bool) or not isinstance(level, int) or level < 0:
        raise CorpusFormatError("level must be a nonnegative integer", line_no)
    return doc_id, text, level


def load_corpus(
    path: PathLike,
    expected_levels: Optional[Sequence[int]] = None,
    policy: TokenizationPolicy = DEFAULT_POLICY,
) -> LeveledCorpus:
    """
    Load a leveled corpus from a JSON Lines file

    The level set comes from `expected_levels`, else the `.meta.json` sidecar,
    else the sorted distinct levels found in the file.

    Args:
        path (PathLike): Corpus file
        expected_levels (Optional[Sequence[int]]): Declared levels, easiest first
        policy (TokenizationPolicy): Used to reject documents with no tokens

    Returns:
        LeveledCorpus: Documents in file order

    Raises:
        CorpusFormatError: malformed line, duplicate id, unknown level, empty corpus
    """
    path = Path(path)
    meta = _read_meta(path)
    declared = list(expected_levels) if expected_levels is not None else meta.get("levels")
    if declared is not None and list(declared) != sorted(set(declared)):
        raise CorpusFormatError(f"declared levels must be strictly ascending, got {declared}")

    documents: List[Document] = []
    seen: Set[str] = set()
    for line_no, raw in iter_jsonl(path):
        doc_id, text, level = _parse_row(raw, line_no)
        if doc_id in seen:
            raise DuplicateDocumentError(doc_id, line_no)
        if declared is not None and level not in declared:
            raise UnknownLevelError(level, list(declared), line_no)
        if not tokenize(text, policy):
            raise CorpusFormatError(f"document {doc_id!r} has no tokens", line_no)
        seen.add(doc_id)
        documents.append(Document(id=doc_id, text=text, level=level))

    if not documents:
        raise EmptyCorpusError(f"corpus file {path} has no documents")

    levels = list(declared) if declared is not None else sorted({d.level for d in documents})
    counts = Counter(doc.level for doc in documents)
    if len(levels) < 2:
        raise CorpusFormatError(f"corpus needs at least 2 levels, found {levels}")
    missing = [level for level in levels if counts[level] == 0]
    if missing:
        raise CorpusFormatError(f"declared levels {missing} have no documents")

    corpus = LeveledCorpus(
        documents=documents,
        levels=levels,
        language_tag=str(meta.get("language", "und")),
    )
    logger.info(f"Loaded {len(documents)} documents over levels {levels} from {path}")
    return corpus


def save_corpus(corpus: LeveledCorpus, path: PathLike) -> None:
    """
    Write a corpus as JSON Lines plus its `.meta.json` sidecar

    Args:
        corpus (LeveledCorpus): Corpus to write
        path (PathLike): Destination `.jsonl` file
    """
    write_jsonl(path, ({"id": d.id, "text": d.text, "level": d.level} for d in corpus.documents))
    write_json(meta_path_for(path), {"levels": corpus.levels, "language": corpus.language_tag})


def load_unlabeled(path: PathLike) -> List[Tuple[str, str]]:
    """
    Load documents to assess: objects with `id` and `text` (a `level` key is ignored)

    Args:
        path (PathLike): JSON Lines file

    Returns:
        List[Tuple[str, str]]: (id, text) pairs in file order
    """
    rows: List[Tuple[str, str]] = []
    seen: Set[str] = set()
    for line_no, raw in iter_jsonl(path):
        if not isinstance(raw, dict) or not {"id", "text"} <= set(raw):
            raise CorpusFormatError("expected an object with keys id and text", line_no)
        doc_id, text = raw["id"], raw["text"]
        if not isinstance(doc_id, str) or not doc_id or not isinstance(text, str):
            raise CorpusFormatError("id must be a nonempty string and text a string", line_no)
        if doc_id in seen:
            raise DuplicateDocumentError(doc_id, line_no)
        seen.add(doc_id)
        rows.append((doc_id, text))
    if not rows:
        raise EmptyCorpusError(f"input file {path} has no documents")
    return rows


def load_stopwords(path: PathLike) -> Set[str]:
    """One stopword per line; blank lines and `#` comments ignored"""
    words = set()
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            word = line.strip()
            if word and not word.startswith("#"):
                words.add(word.lower())
    return words


def to_nbow(
    tokens: Iterable[str],
    table: EmbeddingTable,
    stopwords: Optional[Set[str]] = None,
    doc_id: str = "",
) -> NBowVector:
    """
    Build a normalized bag-of-words over the embedding vocabulary

    Out-of-vocabulary tokens and stopwords are dropped; the remaining counts
    are normalized to sum to 1.

    Args:
        tokens (Iterable[str]): Document tokens
        table (EmbeddingTable): Vocabulary source
        stopwords (Optional[Set[str]]): Tokens to drop
        doc_id (str): Id recorded on the vector and in errors

    Returns:
        NBowVector: Mass per token index

    Raises:
        AllTokensDropped: when nothing survives the filters
    """
    stopwords = stopwords or set()
    counts: Counter = Counter()
    for token in tokens:
        if token in stopwords:
            continue
        index = table.vocab.get(token)
        if index is not None:
            counts[index] += 1
    if not counts:
        raise AllTokensDropped(doc_id)
    total = sum(counts.values())
    entries = {index: counts[index] / total for index in sorted(counts)}
    return NBowVector(entries=entries, doc_id=doc_id)


def split_folds(corpus: LeveledCorpus, k: int, seed: int) -> FoldAssignment:
    """
    Stratified k-fold assignment

    Each class is shuffled with a seeded generator and dealt round-robin; the
    dealing offset carries across classes so overall fold sizes stay balanced.

    Args:
        corpus (LeveledCorpus): Corpus to split
        k (int): Number of folds
        seed (int): Shuffle seed

    Returns:
        FoldAssignment: Deterministic for fixed (corpus, k, seed)

    Raises:
        FoldError: k < 2 or a class with fewer than k documents
    """
    if k < 2:
        raise FoldError(f"k must be at least 2, got {k}")
    counts = corpus.level_counts()
    for level, count in counts.items():
        if count < k:
            raise FoldError(f"class {level} has {count} documents, fewer than k={k}")

    rng = np.random.default_rng(seed)
    assignment: Dict[str, int] = {}
    offset = 0
    for level in corpus.levels:
        ids = [doc.id for doc in corpus.documents if doc.level == level]
        for position, index in enumerate(rng.permutation(len(ids))):
            assignment[ids[index]] = (offset + position) % k
        offset = (offset + len(ids)) % k
    ordered = {doc.id: assignment[doc.id] for doc in corpus.documents}
    return FoldAssignment(k=k, assignment=ordered)
