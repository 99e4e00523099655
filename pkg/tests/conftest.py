"""
Shared fixtures: tiny embedding tables, corpus writers and synthetic corpora
"""
import json
from pathlib import Path
from typing import Callable, Dict, List

import pytest

from readability_wmd.domain_types import Document, LeveledCorpus
from readability_wmd.embeddings import EmbeddingTable
from readability_wmd.synth import SynthFixture, SynthSpec, generate_fixture, write_fixture


@pytest.fixture
def tiny_table() -> EmbeddingTable:
    """The 2-D four-word table: p=(0,0), q=(1,0), r=(0,1), s=(1,1)"""
    return EmbeddingTable.from_vectors(
        ["p", "q", "r", "s"],
        [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
    )


@pytest.fixture
def write_jsonl_file(tmp_path: Path) -> Callable[[List, str], Path]:
    """Write raw rows (dicts or preformatted strings) to a JSONL file under tmp_path"""

    def _write(rows: List, name: str = "corpus.jsonl") -> Path:
        path = tmp_path / name
        lines = [row if isinstance(row, str) else json.dumps(row) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write


@pytest.fixture
def corpus_factory() -> Callable[[Dict[int, int]], LeveledCorpus]:
    """Build an in-memory corpus with the given number of documents per level"""

    def _build(per_level: Dict[int, int]) -> LeveledCorpus:
        documents = [
            Document(id=f"d{level}-{i:02d}", text=f"word{level} text number {i}", level=level)
            for level, count in per_level.items()
            for i in range(count)
        ]
        return LeveledCorpus(documents=documents, levels=sorted(per_level))

    return _build


@pytest.fixture(scope="session")
def separable_fixture() -> SynthFixture:
    """3 classes x 15 documents, no style noise"""
    return generate_fixture(SynthSpec(n_classes=3, docs_per_class=15, seed=11))


@pytest.fixture
def fixture_dir(tmp_path: Path, separable_fixture: SynthFixture) -> Path:
    """The separable fixture written to disk with its config.json"""
    out = tmp_path / "fixture"
    write_fixture(separable_fixture, out)
    return out
