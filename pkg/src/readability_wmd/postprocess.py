"""
Label correction: bookshelf ranking, neighbor voting and the WMD tie-break

A target document is classified, placed on a bookshelf of training documents
sorted by the probability of the hardest class, and relabeled by a hard vote
over the gold levels of its nearest shelf neighbors. Ties go to the tied level
whose neighbors have the least normalized WMD to the target.
"""
import logging
from collections import Counter
from enum import Enum
from typing import Dict, List, Optional, Sequence, Set

import numpy as np
from pydantic import BaseModel, Field

from readability_wmd.classifier import ProbabilisticModel, argmax_level, predict_proba, predict_proba_matrix
from readability_wmd.corpus import DEFAULT_POLICY, TokenizationPolicy, to_nbow, tokenize
from readability_wmd.domain_types import (
    Bookshelf,
    CorrectionReport,
    Document,
    LeveledCorpus,
    NBowVector,
    NeighborRecord,
    ShelfEntry,
    VoteOutcome,
)
from readability_wmd.embeddings import EmbeddingTable
from readability_wmd.errors import AllTokensDropped, PhaseError
from readability_wmd.features import FeatureConfig, extract_features, feature_matrix
from readability_wmd.wmd import wmd

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 3
SCORE_TOL = 1e-12


class CorrectionMode(str, Enum):
    """How vote ties are resolved"""

    WMD = "wmd"
    VOTE_ONLY = "vote-only"


class TieBreakResult(BaseModel):
    """Outcome of the WMD tie-break"""

    level: int
    class_scores: Dict[int, float] = Field(..., description="Mean normalized WMD per tied level")
    distances: Dict[str, float] = Field(..., description="Exact WMD to each compared neighbor")


class ShelfSummary(BaseModel):
    """Where the target landed on the bookshelf"""

    target_index: int
    size: int
    target_prob: float
    neighbor_ids: List[str]


class CorrectionResult(BaseModel):
    """Full trace of one label correction"""

    doc_id: str
    level: int = Field(..., description="Corrected level")
    base_prediction: int = Field(..., description="Classifier argmax before correction")
    vote: VoteOutcome
    shelf: ShelfSummary
    neighbors: List[NeighborRecord]


def build_bookshelf(train: Sequence[ShelfEntry], target: ShelfEntry) -> Bookshelf:
    """
    Rank training entries plus the target by hardest-class probability

    Equal probabilities are ordered by doc_id.

    Args:
        train (Sequence[ShelfEntry]): Training entries with gold levels
        target (ShelfEntry): Entry to place

    Returns:
        Bookshelf: Sorted shelf with the target's position
    """
    if not train:
        raise ValueError("cannot build a bookshelf without training entries")
    # The target sorts after a training entry with the same probability and id
    keyed = [((e.hardest_class_prob, e.doc_id, 0), e) for e in train]
    keyed.append(((target.hardest_class_prob, target.doc_id, 1), target))
    keyed.sort(key=lambda pair: pair[0])
    entries = [entry for _, entry in keyed]
    target_index = next(i for i, (key, _) in enumerate(keyed) if key[2] == 1)
    return Bookshelf(entries=entries, target_index=target_index)


def gather_neighbors(shelf: Bookshelf, window: int = DEFAULT_WINDOW) -> List[ShelfEntry]:
    """
    Up to `window` entries on each side of the target, nearest first per side

    Returns the left side followed by the right side; edge targets get fewer.
    """
    if window < 1:
        raise ValueError(f"window must be at least 1, got {window}")
    t = shelf.target_index
    left = [shelf.entries[i] for i in range(t - 1, max(t - window, 0) - 1, -1)]
    right = shelf.entries[t + 1 : t + 1 + window]
    return left + list(right)


def hard_vote(neighbors: Sequence[ShelfEntry]) -> VoteOutcome:
    """
    Majority over the neighbors' gold levels

    A unique maximum sets `chosen`; otherwise all tied levels are returned in
    `winners` and `chosen` stays unset for the tie-break.
    """
    if not neighbors:
        raise ValueError("hard vote needs at least one neighbor")
    missing = [n.doc_id for n in neighbors if n.gold_level is None]
    if missing:
        raise ValueError(f"neighbors without gold levels: {missing}")
    counts = Counter(n.gold_level for n in neighbors)
    top = max(counts.values())
    winners = sorted(level for level, count in counts.items() if count == top)
    return VoteOutcome(
        counts={level: counts[level] for level in sorted(counts)},
        winners=winners,
        chosen=winners[0] if len(winners) == 1 else None,
        tie_broken=len(winners) > 1,
    )


def _require_nbow(entry: ShelfEntry) -> NBowVector:
    if entry.nbow is None:
        raise AllTokensDropped(entry.doc_id)
    return entry.nbow


def wmd_tiebreak(
    target: ShelfEntry,
    winners: Sequence[int],
    neighbors: Sequence[ShelfEntry],
    table: EmbeddingTable,
) -> TieBreakResult:
    """
    Resolve a vote tie by the least normalized WMD

    Every neighbor whose gold level is among the winners is compared with the
    target by exact WMD. Distances are divided by the largest of them, each
    tied level is scored by the mean over its neighbors, and the lowest score
    wins. Scores equal within SCORE_TOL go to the easier level.

    Args:
        target (ShelfEntry): Target entry with an nBOW vector
        winners (Sequence[int]): Tied levels, at least two
        neighbors (Sequence[ShelfEntry]): Gathered neighbors
        table (EmbeddingTable): Word vectors

    Returns:
        TieBreakResult: Chosen level, per-level scores and raw distances

    Raises:
        AllTokensDropped: the target or a compared neighbor has no nBOW vector
    """
    winners = sorted(set(winners))
    if len(winners) < 2:
        raise ValueError(f"tie-break needs at least two tied levels, got {winners}")
    compared = [n for n in neighbors if n.gold_level in winners]
    absent = set(winners) - {n.gold_level for n in compared}
    if absent:
        raise ValueError(f"no neighbors for tied levels {sorted(absent)}")

    source = _require_nbow(target)
    distances = {n.doc_id: wmd(source, _require_nbow(n), table).distance for n in compared}
    largest = max(distances.values())

    per_level: Dict[int, List[float]] = {level: [] for level in winners}
    for n in compared:
        normalized = distances[n.doc_id] / largest if largest > 0.0 else 0.0
        per_level[n.gold_level].append(normalized)
    scores = {level: float(np.mean(values)) for level, values in per_level.items()}

    best = min(scores.values())
    level = min(lvl for lvl, score in scores.items() if score - best <= SCORE_TOL)
    return TieBreakResult(level=level, class_scores=scores, distances=distances)


class LabelCorrector:
    """
    Corrects predicted levels against a fixed training shelf

    Training features, hardest-class probabilities and nBOW vectors are
    computed once; each call to `correct` then runs the three phases for one
    target.
    """

    def __init__(
        self,
        model: ProbabilisticModel,
        train: LeveledCorpus,
        table: EmbeddingTable,
        feature_config: FeatureConfig = FeatureConfig(),
        policy: TokenizationPolicy = DEFAULT_POLICY,
        stopwords: Optional[Set[str]] = None,
        window: int = DEFAULT_WINDOW,
    ):
        if window < 1:
            raise ValueError(f"window must be at least 1, got {window}")
        self.model = model
        self.table = table
        self.feature_config = feature_config
        self.policy = policy
        self.stopwords = stopwords
        self.window = window
        self.hardest_level = train.hardest_level
        self.train_entries = self._shelve(train.documents)

    def _nbow_or_none(self, doc_id: str, text: str) -> Optional[NBowVector]:
        try:
            return to_nbow(tokenize(text, self.policy), self.table, self.stopwords, doc_id)
        except AllTokensDropped:
            return None

    def _shelve(self, documents: Sequence[Document]) -> List[ShelfEntry]:
        features = [extract_features(doc, self.feature_config, self.policy) for doc in documents]
        probs = predict_proba_matrix(self.model, feature_matrix(features))
        column = self.model.class_labels.index(self.hardest_level) if (
            self.hardest_level in self.model.class_labels
        ) else None
        entries = []
        dropped = 0
        for doc, row in zip(documents, probs):
            nbow = self._nbow_or_none(doc.id, doc.text)
            dropped += nbow is None
            entries.append(
                ShelfEntry(
                    doc_id=doc.id,
                    gold_level=doc.level,
                    hardest_class_prob=float(row[column]) if column is not None else 0.0,
                    nbow=nbow,
                )
            )
        if dropped:
            logger.warning(f"{dropped} training documents have no in-vocabulary tokens")
        logger.info(f"Shelved {len(entries)} training documents")
        return entries

    def correct(self, doc_id: str, text: str, mode: CorrectionMode = CorrectionMode.WMD) -> CorrectionResult:
        """
        Run classification, ranking and grounding for one target

        Args:
            doc_id (str): Target id
            text (str): Target text
            mode (CorrectionMode): wmd resolves ties by distance, vote-only by
                taking the easier tied level

        Returns:
            CorrectionResult: Corrected level with the vote trace

        Raises:
            PhaseError: tagged with the failing phase
        """
        mode = CorrectionMode(mode)
        try:
            fv = extract_features(Document(id=doc_id, text=text, level=0), self.feature_config, self.policy)
            probs = predict_proba(self.model, fv)
        except Exception as exc:
            raise PhaseError("classification", doc_id, exc) from exc

        try:
            target = ShelfEntry(
                doc_id=doc_id,
                gold_level=None,
                hardest_class_prob=min(max(probs.prob_of(self.hardest_level), 0.0), 1.0),
            )
            shelf = build_bookshelf(self.train_entries, target)
        except Exception as exc:
            raise PhaseError("ranking", doc_id, exc) from exc

        try:
            neighbors = gather_neighbors(shelf, self.window)
            if mode is CorrectionMode.WMD:
                target = target.model_copy(
                    update={"nbow": to_nbow(tokenize(text, self.policy), self.table, self.stopwords, doc_id)}
                )
            vote = hard_vote(neighbors)
            distances: Dict[str, float] = {}
            if vote.chosen is None:
                if mode is CorrectionMode.WMD:
                    tie = wmd_tiebreak(target, vote.winners, neighbors, self.table)
                    distances = tie.distances
                    vote = vote.model_copy(
                        update={"chosen": tie.level, "class_scores": tie.class_scores, "distances": distances}
                    )
                else:
                    vote = vote.model_copy(update={"chosen": vote.winners[0]})
        except Exception as exc:
            raise PhaseError("grounding", doc_id, exc) from exc

        return CorrectionResult(
            doc_id=doc_id,
            level=vote.chosen,
            base_prediction=argmax_level(probs),
            vote=vote,
            shelf=ShelfSummary(
                target_index=shelf.target_index,
                size=len(shelf.entries),
                target_prob=target.hardest_class_prob,
                neighbor_ids=[n.doc_id for n in neighbors],
            ),
            neighbors=[
                NeighborRecord(id=n.doc_id, level=n.gold_level, distance=distances.get(n.doc_id))
                for n in neighbors
            ],
        )


def correct_label(
    target_doc: Document,
    model: ProbabilisticModel,
    train: LeveledCorpus,
    table: EmbeddingTable,
    mode: CorrectionMode = CorrectionMode.WMD,
    **options,
) -> CorrectionResult:
    """
    Correct one document's level end to end

    Builds a LabelCorrector for `train`; reuse a LabelCorrector directly when
    correcting many targets against the same shelf.
    """
    return LabelCorrector(model, train, table, **options).correct(target_doc.id, target_doc.text, mode)


def to_report(result: CorrectionResult) -> CorrectionReport:
    """Flatten a correction trace into a report row"""
    return CorrectionReport(
        id=result.doc_id,
        base_prediction=result.base_prediction,
        corrected_label=result.level,
        vote_counts=result.vote.counts,
        tie_broken=result.vote.tie_broken,
        class_scores=result.vote.class_scores,
        neighbors=result.neighbors,
        target_index=result.shelf.target_index,
        shelf_size=result.shelf.size,
    )
