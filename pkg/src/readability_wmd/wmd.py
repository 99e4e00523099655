"""
Word Mover's Distance: exact solve, transport plans and cheap lower bounds
"""
import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from readability_wmd.domain_types import NBowVector, TransportPlan, WmdResult
from readability_wmd.embeddings import EmbeddingTable, cost_matrix
from readability_wmd.errors import PairwiseError, ReadabilityError
from readability_wmd.transport import solve_transport

logger = logging.getLogger(__name__)

# Marker stored in pairwise matrices for candidates pruned by their bound
BUDGET_EXCEEDED = math.inf


def wmd(a: NBowVector, b: NBowVector, table: EmbeddingTable, want_plan: bool = False) -> WmdResult:
    """
    Exact Word Mover's Distance between two nBOW documents

    Args:
        a (NBowVector): Source distribution
        b (NBowVector): Destination distribution
        table (EmbeddingTable): Word vectors for the ground cost
        want_plan (bool): Attach the optimal transport plan

    Returns:
        WmdResult: Optimal cost, optional plan and solver statistics

    Raises:
        SolverIterationError: pivot cap exceeded
    """
    rows, cols = a.indices(), b.indices()
    if a.entries == b.entries:
        plan = None
        if want_plan:
            plan = TransportPlan(
                flows=[(int(i), int(i), float(w)) for i, w in zip(rows, a.weights())],
                objective=0.0,
            )
        return WmdResult(distance=0.0, plan=plan, basic_cells=len(rows))

    costs = cost_matrix(table, a, b)
    solution = solve_transport(a.weights(), b.weights(), costs)
    plan = None
    if want_plan:
        nonzero = np.argwhere(solution.flows > 0.0)
        plan = TransportPlan(
            flows=[(int(rows[i]), int(cols[j]), float(solution.flows[i, j])) for i, j in nonzero],
            objective=solution.objective,
        )
    return WmdResult(
        distance=solution.objective,
        plan=plan,
        basic_cells=len(solution.support),
    )


def _centroid(nbow: NBowVector, table: EmbeddingTable) -> np.ndarray:
    return nbow.weights() @ table.vectors[nbow.indices()]


def word_centroid_distance(a: NBowVector, b: NBowVector, table: EmbeddingTable) -> float:
    """Distance between the mass-weighted centroids; a lower bound on WMD"""
    return float(np.linalg.norm(_centroid(a, table) - _centroid(b, table)))


def relaxed_wmd(a: NBowVector, b: NBowVector, table: EmbeddingTable) -> float:
    """
    Relaxed WMD lower bound

    Each one-sided relaxation drops one marginal constraint and sends every
    word's mass to its nearest counterpart. The two relaxations alone can fall
    below the centroid bound (shared words with unequal weights), so the
    centroid bound joins the maximum; every term is a lower bound on WMD.
    """
    costs = cost_matrix(table, a, b)
    from_a = float(a.weights() @ costs.min(axis=1))
    from_b = float(b.weights() @ costs.min(axis=0))
    return max(from_a, from_b, word_centroid_distance(a, b, table))


def pairwise_wmd(
    targets: Sequence[NBowVector],
    candidates: Sequence[NBowVector],
    table: EmbeddingTable,
    prune: bool = False,
    budgets: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """
    Exact WMD for every (target, candidate) pair

    With `prune` and per-target `budgets`, a candidate whose relaxed bound
    already exceeds the target's budget is skipped and its cell holds
    BUDGET_EXCEEDED.

    Args:
        targets (Sequence[NBowVector]): Row documents
        candidates (Sequence[NBowVector]): Column documents
        table (EmbeddingTable): Word vectors
        prune (bool): Enable bound-based skipping
        budgets (Optional[Sequence[float]]): Distance budget per target

    Returns:
        np.ndarray: len(targets) x len(candidates) distances

    Raises:
        PairwiseError: a cell failed; carries the target and candidate positions
    """
    if not targets or not candidates:
        raise ValueError("pairwise_wmd needs nonempty target and candidate lists")
    if budgets is not None and len(budgets) != len(targets):
        raise ValueError(f"{len(budgets)} budgets for {len(targets)} targets")

    distances = np.zeros((len(targets), len(candidates)))
    skipped = 0
    for t, target in enumerate(targets):
        budget = budgets[t] if (prune and budgets is not None) else None
        for c, candidate in enumerate(candidates):
            try:
                if budget is not None and relaxed_wmd(target, candidate, table) > budget:
                    distances[t, c] = BUDGET_EXCEEDED
                    skipped += 1
                    continue
                distances[t, c] = wmd(target, candidate, table).distance
            except (ReadabilityError, ValueError, IndexError) as exc:
                raise PairwiseError(t, c, exc) from exc
    if skipped:
        logger.info(f"Pruned {skipped} of {distances.size} pairs by relaxed WMD budget")
    return distances


def plan_by_token(plan: TransportPlan, table: EmbeddingTable) -> List[tuple]:
    """Plan flows as (source token, destination token, mass) triples"""
    tokens = table.tokens
    return [(tokens[i], tokens[j], mass) for i, j, mass in plan.flows]
