"""
Exact transportation problem on POT's network simplex

`ot.emd` finds an optimal vertex of the transportation polytope. Its support
forms a forest in the bipartite row/column graph, so the flows are recomputed
on that forest from the unperturbed masses by peeling leaves. This leaves the
marginals exact instead of accurate to the solver's floating-point drift.
"""
import logging
import warnings
from collections import deque
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import ot

from readability_wmd.errors import SolverIterationError

logger = logging.getLogger(__name__)

MASS_TOL = 1e-9

# Result codes reported by POT's network simplex
_OPTIMAL = 1
_MAX_ITER_REACHED = 3

Cell = Tuple[int, int]


@dataclass(frozen=True)
class TransportSolution:
    """Optimal flows over supply x demand"""

    flows: np.ndarray
    objective: float
    support: List[Cell]


def _tree_flows(support: List[Cell], supply: np.ndarray, demand: np.ndarray) -> np.ndarray:
    """Solve a support forest for the given masses by peeling leaves"""
    m, n = len(supply), len(demand)
    flows = np.zeros((m, n))
    remaining = np.concatenate([supply, demand]).astype(np.float64)
    # Nodes 0..m-1 are rows, m..m+n-1 are columns
    incident: List[set] = [set() for _ in range(m + n)]
    for i, j in support:
        incident[i].add((i, j))
        incident[m + j].add((i, j))
    leaves = deque(node for node in range(m + n) if len(incident[node]) == 1)
    while leaves:
        node = leaves.popleft()
        if len(incident[node]) != 1:
            continue
        cell = incident[node].pop()
        i, j = cell
        other = m + j if node == i else i
        flows[i, j] = remaining[node]
        remaining[other] -= remaining[node]
        incident[other].discard(cell)
        if len(incident[other]) == 1:
            leaves.append(other)
    return flows


def _marginal_error(flows: np.ndarray, supply: np.ndarray, demand: np.ndarray) -> float:
    return float(
        max(np.abs(flows.sum(axis=1) - supply).max(), np.abs(flows.sum(axis=0) - demand).max())
    )


def solve_transport(
    supply: np.ndarray,
    demand: np.ndarray,
    costs: np.ndarray,
    max_iter: Optional[int] = None,
) -> TransportSolution:
    """
    Solve min sum(T * costs) s.t. T >= 0, T 1 = supply, T' 1 = demand

    Args:
        supply (np.ndarray): Row masses, nonnegative
        demand (np.ndarray): Column masses, nonnegative, same total as supply
        costs (np.ndarray): m x n nonnegative cost matrix
        max_iter (Optional[int]): Pivot cap, default 100 * (m + n)

    Returns:
        TransportSolution: Optimal flows, objective and support cells

    Raises:
        ValueError: inconsistent shapes or masses, or a cap below one pivot
        SolverIterationError: pivot cap exceeded
    """
    supply = np.asarray(supply, dtype=np.float64)
    demand = np.asarray(demand, dtype=np.float64)
    costs = np.ascontiguousarray(costs, dtype=np.float64)
    m, n = len(supply), len(demand)
    if m == 0 or n == 0 or costs.shape != (m, n):
        raise ValueError(f"cost matrix shape {costs.shape} does not match ({m}, {n})")
    if np.any(supply < 0) or np.any(demand < 0):
        raise ValueError("masses must be nonnegative")
    if abs(supply.sum() - demand.sum()) > MASS_TOL:
        raise ValueError(f"unbalanced masses: {supply.sum()!r} vs {demand.sum()!r}")
    cap = max_iter if max_iter is not None else 100 * (m + n)
    if cap < 1:
        # POT reads a nonpositive cap as unlimited
        raise ValueError(f"max_iter must be at least 1, got {cap}")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        plan, log = ot.emd(supply, demand, costs, numItermax=cap, log=True)
    if log["result_code"] == _MAX_ITER_REACHED:
        raise SolverIterationError(cap)
    if log["result_code"] != _OPTIMAL:
        raise ValueError(f"transport problem not solved: {log['warning']}")

    plan = np.asarray(plan, dtype=np.float64)
    support = [(int(i), int(j)) for i, j in np.argwhere(plan > 0.0)]
    flows = _tree_flows(support, supply, demand)
    flows[flows < 0.0] = 0.0
    if _marginal_error(flows, supply, demand) > MASS_TOL:
        logger.debug(f"Support of a {m}x{n} plan is not a forest, keeping the solver flows")
        flows = np.clip(plan, 0.0, None)
    objective = float(np.sum(flows * costs))
    logger.debug(f"Transport {m}x{n} solved on {len(support)} cells, objective {objective:.12g}")
    return TransportSolution(flows=flows, objective=objective, support=support)
