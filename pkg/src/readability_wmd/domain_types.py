"""
Shared record types for the readability pipeline
"""
import math
from collections import Counter
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

# Tolerance on the total mass of an nBOW vector
NBOW_MASS_TOL = 1e-12


class Document(BaseModel):
    """A leveled text"""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., min_length=1, description="Unique document id within a corpus")
    text: str = Field(..., description="UTF-8 document text")
    level: int = Field(..., ge=0, description="Ordinal readability class, 0 is easiest")


class LeveledCorpus(BaseModel):
    """An ordered document collection with its declared level scale"""

    model_config = ConfigDict(frozen=True)

    documents: List[Document] = Field(..., description="Documents in file order")
    levels: List[int] = Field(..., description="Class labels from easiest to hardest")
    language_tag: str = Field("und", description="Language of the texts")

    @model_validator(mode="after")
    def _check_invariants(self) -> "LeveledCorpus":
        if len(self.levels) < 2:
            raise ValueError("a corpus needs at least 2 levels")
        if list(self.levels) != sorted(set(self.levels)):
            raise ValueError(f"levels must be strictly ascending, got {self.levels}")
        seen = set()
        for doc in self.documents:
            if doc.id in seen:
                raise ValueError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)
        counts = Counter(doc.level for doc in self.documents)
        unknown = set(counts) - set(self.levels)
        if unknown:
            raise ValueError(f"levels {sorted(unknown)} not declared in {self.levels}")
        empty = [level for level in self.levels if counts[level] == 0]
        if empty:
            raise ValueError(f"levels {empty} have no documents")
        return self

    @property
    def hardest_level(self) -> int:
        return self.levels[-1]

    def level_counts(self) -> Dict[int, int]:
        counts = Counter(doc.level for doc in self.documents)
        return {level: counts[level] for level in self.levels}

    def by_id(self) -> Dict[str, Document]:
        return {doc.id: doc for doc in self.documents}

    def subset(self, ids: List[str]) -> List[Document]:
        """Documents whose id is in `ids`, in corpus order"""
        wanted = set(ids)
        return [doc for doc in self.documents if doc.id in wanted]


class NBowVector(BaseModel):
    """Normalized bag-of-words: a probability distribution over embedding rows"""

    model_config = ConfigDict(frozen=True)

    entries: Dict[int, float] = Field(..., description="Token index to fraction of document mass")
    doc_id: str = Field("", description="Document the vector was built from")

    @model_validator(mode="after")
    def _check_mass(self) -> "NBowVector":
        if not self.entries:
            raise ValueError("nBOW vector has no entries")
        if any(not (w > 0.0) for w in self.entries.values()):
            raise ValueError("nBOW weights must be strictly positive")
        total = math.fsum(self.entries.values())
        if abs(total - 1.0) > NBOW_MASS_TOL:
            raise ValueError(f"nBOW weights sum to {total!r}, expected 1")
        return self

    def indices(self) -> np.ndarray:
        return np.array(sorted(self.entries), dtype=np.int64)

    def weights(self) -> np.ndarray:
        return np.array([self.entries[i] for i in sorted(self.entries)], dtype=np.float64)


class FoldAssignment(BaseModel):
    """Stratified assignment of documents to cross-validation folds"""

    model_config = ConfigDict(frozen=True)

    k: int = Field(..., ge=2, description="Number of folds")
    assignment: Dict[str, int] = Field(..., description="Document id to fold index")

    def test_ids(self, fold: int) -> List[str]:
        return [doc_id for doc_id, f in self.assignment.items() if f == fold]

    def train_ids(self, fold: int) -> List[str]:
        return [doc_id for doc_id, f in self.assignment.items() if f != fold]


class FeatureVector(BaseModel):
    """Fixed-order surface features of one document"""

    model_config = ConfigDict(frozen=True)

    values: List[float] = Field(..., description="Feature values in `names` order")
    names: List[str] = Field(..., description="Feature names")
    doc_id: str = Field("", description="Source document id")

    @model_validator(mode="after")
    def _check_shape(self) -> "FeatureVector":
        if len(self.values) != len(self.names):
            raise ValueError("feature values and names differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names must be unique")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError(f"non-finite feature value in {self.doc_id!r}")
        return self


class ClassProbabilities(BaseModel):
    """Probability simplex over the model's classes for one document"""

    model_config = ConfigDict(frozen=True)

    probs: List[float] = Field(..., description="Per-class probabilities aligned with labels")
    labels: List[int] = Field(..., description="Class labels, easiest to hardest")
    doc_id: str = Field("", description="Source document id")

    def prob_of(self, level: int) -> float:
        """Probability of `level`, 0 when the model never saw it"""
        if level not in self.labels:
            return 0.0
        return self.probs[self.labels.index(level)]


class TransportPlan(BaseModel):
    """Optimal flow between two nBOW vectors, stored sparsely by token index"""

    model_config = ConfigDict(frozen=True)

    flows: List[Tuple[int, int, float]] = Field(
        ..., description="(source token index, destination token index, mass) with mass > 0"
    )
    objective: float = Field(..., ge=0.0, description="Sum of mass times ground cost")

    def row_sums(self) -> Dict[int, float]:
        sums: Dict[int, float] = {}
        for i, _, mass in self.flows:
            sums[i] = sums.get(i, 0.0) + mass
        return sums

    def column_sums(self) -> Dict[int, float]:
        sums: Dict[int, float] = {}
        for _, j, mass in self.flows:
            sums[j] = sums.get(j, 0.0) + mass
        return sums


class WmdResult(BaseModel):
    """Word Mover's Distance with optional plan and solver statistics"""

    model_config = ConfigDict(frozen=True)

    distance: float = Field(..., ge=0.0, description="Optimal transport cost")
    plan: Optional[TransportPlan] = Field(None, description="Optimal plan when requested")
    basic_cells: int = Field(0, ge=0, description="Cells carrying flow in the optimal plan")


class ShelfEntry(BaseModel):
    """A document placed on the bookshelf"""

    model_config = ConfigDict(frozen=True)

    doc_id: str
    gold_level: Optional[int] = Field(None, description="Known level; None for the target")
    hardest_class_prob: float = Field(..., ge=0.0, le=1.0)
    nbow: Optional[NBowVector] = Field(
        None, description="nBOW vector; None when every token was dropped"
    )


class Bookshelf(BaseModel):
    """Training documents plus one target sorted by hardest-class probability"""

    model_config = ConfigDict(frozen=True)

    entries: List[ShelfEntry]
    target_index: int = Field(..., ge=0)

    @property
    def target(self) -> ShelfEntry:
        return self.entries[self.target_index]


class VoteOutcome(BaseModel):
    """Result of hard voting over shelf neighbors, plus tie-break evidence"""

    counts: Dict[int, int] = Field(..., description="Vote count per level")
    winners: List[int] = Field(..., description="Levels with the maximal count, ascending")
    chosen: Optional[int] = Field(None, description="Final level; unset while a tie is pending")
    tie_broken: bool = Field(False, description="True when more than one level tied")
    class_scores: Optional[Dict[int, float]] = Field(
        None, description="Mean normalized WMD per tied level (wmd mode only)"
    )
    distances: Optional[Dict[str, float]] = Field(
        None, description="Exact WMD from the target to each compared neighbor"
    )


class NeighborRecord(BaseModel):
    """A shelf neighbor as reported to the user"""

    id: str
    level: int
    distance: Optional[float] = None


class CorrectionReport(BaseModel):
    """One row of the correction report"""

    id: str
    base_prediction: Optional[int] = None
    corrected_label: Optional[int] = None
    vote_counts: Dict[int, int] = Field(default_factory=dict)
    tie_broken: bool = False
    class_scores: Optional[Dict[int, float]] = None
    neighbors: List[NeighborRecord] = Field(default_factory=list)
    target_index: Optional[int] = None
    shelf_size: Optional[int] = None
    error: Optional[str] = Field(None, description="Error message, if the document failed")


class UTestResult(BaseModel):
    """Two-sample Mann-Whitney U test with normal approximation"""

    u_statistic: float = Field(..., description="U of the first sample")
    z_statistic: float
    p_value_two_sided: float = Field(..., ge=0.0, le=1.0)
    n1: int = Field(..., ge=1)
    n2: int = Field(..., ge=1)
    mean_a: float
    mean_b: float


class MethodScores(BaseModel):
    """Accuracy and macro-F1 of one method"""

    accuracy: float = Field(..., ge=0.0, le=1.0)
    macro_f1: float = Field(..., ge=0.0, le=1.0)


class FoldReport(BaseModel):
    """Metrics of one cross-validation fold"""

    fold: int
    n_train: int
    n_test: int
    methods: Dict[str, MethodScores]
    tie_rate: float = Field(..., ge=0.0, le=1.0)
    changed: int = Field(..., ge=0, description="Targets whose WMD-corrected label differs from base")


class EvalReport(BaseModel):
    """Cross-validated comparison of base, vote-only and WMD-corrected labels"""

    k: int
    seed: int
    config_hash: str
    classes: List[int]
    folds: List[FoldReport]
    aggregate: Dict[str, MethodScores]
    tie_rate: float = Field(..., ge=0.0, le=1.0)
    confusion: Dict[str, List[List[int]]] = Field(
        ..., description="Per method, rows = gold class, columns = predicted class"
    )
