"""
Metrics, cross-validated experiments and the Mann-Whitney U test
"""
import logging
import math
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.special import ndtr
from scipy.stats import rankdata, tiecorrect

from readability_wmd.classifier import train
from readability_wmd.config import RunConfig, settings_hash_payload
from readability_wmd.corpus import DEFAULT_POLICY, TokenizationPolicy, split_folds, to_nbow, tokenize
from readability_wmd.domain_types import (
    Document,
    EvalReport,
    FoldReport,
    LeveledCorpus,
    MethodScores,
    UTestResult,
)
from readability_wmd.embeddings import EmbeddingTable
from readability_wmd.errors import FoldEvaluationError, GroupPairError, ReadabilityError
from readability_wmd.features import extract_features
from readability_wmd.postprocess import CorrectionMode, LabelCorrector
from readability_wmd.utils import canonical_hash
from readability_wmd.wmd import wmd

logger = logging.getLogger(__name__)

METHODS = ("base", "vote-only", "wmd")


def _check_lengths(pred: Sequence[int], gold: Sequence[int]) -> None:
    if len(pred) != len(gold):
        raise ValueError(f"{len(pred)} predictions for {len(gold)} gold labels")
    if not gold:
        raise ValueError("cannot score an empty prediction list")


def accuracy(pred: Sequence[int], gold: Sequence[int]) -> float:
    """Fraction of exact matches"""
    _check_lengths(pred, gold)
    return sum(p == g for p, g in zip(pred, gold)) / len(gold)


def confusion_matrix(pred: Sequence[int], gold: Sequence[int], classes: Sequence[int]) -> List[List[int]]:
    """
    Count matrix with gold classes as rows and predicted classes as columns

    Args:
        pred (Sequence[int]): Predicted levels
        gold (Sequence[int]): Gold levels
        classes (Sequence[int]): Row and column order

    Returns:
        List[List[int]]: len(classes) x len(classes) counts
    """
    _check_lengths(pred, gold)
    position = {level: i for i, level in enumerate(classes)}
    unknown = (set(pred) | set(gold)) - set(position)
    if unknown:
        raise ValueError(f"levels {sorted(unknown)} not in classes {list(classes)}")
    matrix = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for p, g in zip(pred, gold):
        matrix[position[g], position[p]] += 1
    return matrix.tolist()


def macro_f1(pred: Sequence[int], gold: Sequence[int], classes: Sequence[int]) -> float:
    """
    Unweighted mean of per-class F1 over `classes`

    A class with precision + recall = 0 (including one absent from both lists)
    scores 0.
    """
    if not classes:
        raise ValueError("classes must be nonempty")
    matrix = np.asarray(confusion_matrix(pred, gold, classes), dtype=np.float64)
    tp = np.diag(matrix)
    predicted = matrix.sum(axis=0)
    actual = matrix.sum(axis=1)
    precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
    recall = np.divide(tp, actual, out=np.zeros_like(tp), where=actual > 0)
    denominator = precision + recall
    f1 = np.divide(2 * precision * recall, denominator, out=np.zeros_like(tp), where=denominator > 0)
    return float(f1.mean())


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> UTestResult:
    """
    Two-sample Mann-Whitney U test with the normal approximation

    U counts the pairs (x in a, y in b) with x > y, ties counting one half,
    computed from average ranks. The standard deviation carries the tie
    correction and no continuity correction is applied. When every value is
    tied the deviation is 0 and the result is z = 0, p = 1.

    Args:
        a (Sequence[float]): First sample
        b (Sequence[float]): Second sample

    Returns:
        UTestResult: U of `a`, z, two-sided p and sample means
    """
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise ValueError("both samples need at least one value")
    values = np.concatenate([np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)])
    if not np.all(np.isfinite(values)):
        raise ValueError("samples contain non-finite values")

    ranks = rankdata(values)
    u_a = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2.0)
    sigma = math.sqrt(tiecorrect(ranks) * n1 * n2 * (n1 + n2 + 1) / 12.0)
    if sigma == 0.0:
        z, p = 0.0, 1.0
    else:
        z = (u_a - n1 * n2 / 2.0) / sigma
        p = float(min(1.0, max(0.0, 2.0 * ndtr(-abs(z)))))
    return UTestResult(
        u_statistic=u_a,
        z_statistic=z,
        p_value_two_sided=p,
        n1=n1,
        n2=n2,
        mean_a=float(np.mean(values[:n1])),
        mean_b=float(np.mean(values[n1:])),
    )


class GroupExperimentResult(BaseModel):
    """WMD samples of two document-pair groups and the U test between them"""

    utest: UTestResult
    distances_a: List[float] = Field(..., description="WMD per pair of group a")
    distances_b: List[float] = Field(..., description="WMD per pair of group b")


def _pair_distances(
    label: str,
    pairs: Sequence[Tuple[Document, Document]],
    table: EmbeddingTable,
    stopwords: Optional[Set[str]],
    policy: TokenizationPolicy,
) -> List[float]:
    distances = []
    for index, (left, right) in enumerate(pairs):
        try:
            a = to_nbow(tokenize(left.text, policy), table, stopwords, left.id)
            b = to_nbow(tokenize(right.text, policy), table, stopwords, right.id)
            distances.append(wmd(a, b, table).distance)
        except ReadabilityError as exc:
            raise GroupPairError(label, index, (left.id, right.id), exc) from exc
    return distances


def wmd_group_experiment(
    group_a: Sequence[Tuple[Document, Document]],
    group_b: Sequence[Tuple[Document, Document]],
    table: EmbeddingTable,
    stopwords: Optional[Set[str]] = None,
    policy: TokenizationPolicy = DEFAULT_POLICY,
) -> GroupExperimentResult:
    """
    Compare the WMD of two groups of document pairs with a U test

    Typical use: group a holds pairs of different reading levels, group b
    pairs of the same level.

    Args:
        group_a (Sequence[Tuple[Document, Document]]): First group of pairs
        group_b (Sequence[Tuple[Document, Document]]): Second group of pairs
        table (EmbeddingTable): Word vectors
        stopwords (Optional[Set[str]]): Tokens dropped from the nBOW vectors
        policy (TokenizationPolicy): Tokenization switches

    Returns:
        GroupExperimentResult: U test (with group means) and the raw distances

    Raises:
        GroupPairError: naming the group, pair position and document ids
    """
    if not group_a or not group_b:
        raise ValueError("both groups need at least one pair")
    distances_a = _pair_distances("a", group_a, table, stopwords, policy)
    distances_b = _pair_distances("b", group_b, table, stopwords, policy)
    result = mann_whitney_u(distances_a, distances_b)
    logger.info(
        f"Group WMD means {result.mean_a:.6f} vs {result.mean_b:.6f}, "
        f"z = {result.z_statistic:.3f}, p = {result.p_value_two_sided:.3g}"
    )
    return GroupExperimentResult(utest=result, distances_a=distances_a, distances_b=distances_b)


def _scores(pred: List[int], gold: List[int], classes: List[int]) -> MethodScores:
    return MethodScores(accuracy=accuracy(pred, gold), macro_f1=macro_f1(pred, gold, classes))


def cross_validate(
    corpus: LeveledCorpus,
    table: EmbeddingTable,
    config: RunConfig,
    seed: Optional[int] = None,
    stopwords: Optional[Set[str]] = None,
    policy: TokenizationPolicy = DEFAULT_POLICY,
) -> EvalReport:
    """
    Stratified k-fold comparison of base, vote-only and WMD-corrected labels

    Each fold trains the classifier on the other folds, shelves the training
    documents and corrects every held-out document in both correction modes.
    Aggregate scores are unweighted means over folds; confusion matrices pool
    all folds.

    Args:
        corpus (LeveledCorpus): Leveled documents
        table (EmbeddingTable): Word vectors for nBOW and WMD
        config (RunConfig): Feature, classifier, fold and window settings
        seed (Optional[int]): Fold and training seed, `run.seed` by default
        stopwords (Optional[Set[str]]): Tokens dropped from nBOW vectors
        policy (TokenizationPolicy): Tokenization switches

    Returns:
        EvalReport: Per-fold and aggregate metrics

    Raises:
        FoldEvaluationError: wrapping the first failure, with its fold index
    """
    seed = config.seed if seed is None else seed
    k = config.eval.k
    classes = list(corpus.levels)
    folds = split_folds(corpus, k, seed)
    by_id = corpus.by_id()
    features = {doc.id: extract_features(doc, config.features, policy) for doc in corpus.documents}

    fold_reports: List[FoldReport] = []
    predictions: Dict[str, List[int]] = {method: [] for method in METHODS}
    gold_all: List[int] = []
    ties_total = 0
    for fold in range(k):
        try:
            train_docs = [by_id[doc_id] for doc_id in folds.train_ids(fold)]
            test_docs = [by_id[doc_id] for doc_id in folds.test_ids(fold)]
            model = train(
                [features[doc.id] for doc in train_docs],
                [doc.level for doc in train_docs],
                config.classifier,
                seed,
                class_labels=classes,
            )
            shelf_source = LeveledCorpus(documents=train_docs, levels=classes, language_tag=corpus.language_tag)
            corrector = LabelCorrector(
                model,
                shelf_source,
                table,
                config.features,
                policy,
                stopwords,
                config.postprocess.window,
            )

            fold_pred: Dict[str, List[int]] = {method: [] for method in METHODS}
            ties = 0
            for doc in test_docs:
                corrected = corrector.correct(doc.id, doc.text, CorrectionMode.WMD)
                voted = corrector.correct(doc.id, doc.text, CorrectionMode.VOTE_ONLY)
                fold_pred["base"].append(corrected.base_prediction)
                fold_pred["vote-only"].append(voted.level)
                fold_pred["wmd"].append(corrected.level)
                ties += corrected.vote.tie_broken
        except ReadabilityError as exc:
            raise FoldEvaluationError(fold, exc) from exc

        gold = [doc.level for doc in test_docs]
        changed = sum(b != w for b, w in zip(fold_pred["base"], fold_pred["wmd"]))
        fold_reports.append(
            FoldReport(
                fold=fold,
                n_train=len(train_docs),
                n_test=len(test_docs),
                methods={m: _scores(fold_pred[m], gold, classes) for m in METHODS},
                tie_rate=ties / len(test_docs),
                changed=changed,
            )
        )
        for method in METHODS:
            predictions[method].extend(fold_pred[method])
        gold_all.extend(gold)
        ties_total += ties
        logger.info(
            f"Fold {fold}: base acc {fold_reports[-1].methods['base'].accuracy:.3f}, "
            f"wmd acc {fold_reports[-1].methods['wmd'].accuracy:.3f}, {ties} ties, {changed} changed"
        )

    aggregate = {
        method: MethodScores(
            accuracy=float(np.mean([f.methods[method].accuracy for f in fold_reports])),
            macro_f1=float(np.mean([f.methods[method].macro_f1 for f in fold_reports])),
        )
        for method in METHODS
    }
    tie_rate = ties_total / len(gold_all)
    logger.info(f"Tie-break fired for {ties_total} of {len(gold_all)} targets ({tie_rate:.1%})")
    return EvalReport(
        k=k,
        seed=seed,
        config_hash=canonical_hash(settings_hash_payload(config)),
        classes=classes,
        folds=fold_reports,
        aggregate=aggregate,
        tie_rate=tie_rate,
        confusion={m: confusion_matrix(predictions[m], gold_all, classes) for m in METHODS},
    )
