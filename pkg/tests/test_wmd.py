"""
Tests for Word Mover's Distance, its lower bounds and pairwise matrices
"""
import math

import numpy as np
import pytest

from readability_wmd.domain_types import NBowVector
from readability_wmd.embeddings import EmbeddingTable, ground_cost
from readability_wmd.errors import PairwiseError
from readability_wmd.wmd import (
    BUDGET_EXCEEDED,
    pairwise_wmd,
    plan_by_token,
    relaxed_wmd,
    wmd,
    word_centroid_distance,
)

TOL = 1e-9


def _random_nbow(rng, vocab_size, max_support=6):
    size = int(rng.integers(1, max_support + 1))
    indices = rng.choice(vocab_size, size=size, replace=False)
    counts = rng.integers(1, 5, size=size)
    total = int(counts.sum())
    return NBowVector(entries={int(i): int(c) / total for i, c in zip(indices, counts)})


@pytest.fixture(scope="module")
def random_table():
    """30 words in 5 dimensions"""
    rng = np.random.default_rng(17)
    return EmbeddingTable.from_vectors([f"w{i}" for i in range(30)], rng.normal(size=(30, 5)))


@pytest.fixture(scope="module")
def random_pairs(random_table):
    """200 random document pairs over the random table"""
    rng = np.random.default_rng(99)
    return [(_random_nbow(rng, 30), _random_nbow(rng, 30)) for _ in range(200)]


def test_identical_documents(tiny_table):
    """A document is at distance 0 from itself, with the identity plan"""
    a = NBowVector(entries={0: 0.5, 2: 0.5})
    result = wmd(a, a, tiny_table, want_plan=True)

    assert result.distance == 0.0
    assert sorted(result.plan.flows) == [(0, 0, 0.5), (2, 2, 0.5)]


def test_single_word_documents(tiny_table):
    """Single-word documents are as far apart as their words"""
    a = NBowVector(entries={0: 1.0})
    b = NBowVector(entries={3: 1.0})

    assert wmd(a, b, tiny_table).distance == pytest.approx(math.sqrt(2.0))
    assert word_centroid_distance(a, b, tiny_table) == pytest.approx(ground_cost(tiny_table, 0, 3))
    assert relaxed_wmd(a, b, tiny_table) == pytest.approx(ground_cost(tiny_table, 0, 3))


def test_four_word_example(tiny_table):
    """{p, q} to {r, s} moves p to r and q to s at total cost 1"""
    a = NBowVector(entries={0: 0.5, 1: 0.5})
    b = NBowVector(entries={2: 0.5, 3: 0.5})

    result = wmd(a, b, tiny_table, want_plan=True)

    assert result.distance == pytest.approx(1.0, abs=1e-12)
    assert sorted(result.plan.flows) == [(0, 2, 0.5), (1, 3, 0.5)]
    assert plan_by_token(result.plan, tiny_table) == [("p", "r", 0.5), ("q", "s", 0.5)]


def test_plan_marginals(random_table, random_pairs):
    """Plan row and column sums equal the document weights"""
    for a, b in random_pairs[:50]:
        plan = wmd(a, b, random_table, want_plan=True).plan
        rows, cols = plan.row_sums(), plan.column_sums()
        for index, weight in a.entries.items():
            assert rows.get(index, 0.0) == pytest.approx(weight, abs=TOL)
        for index, weight in b.entries.items():
            assert cols.get(index, 0.0) == pytest.approx(weight, abs=TOL)


def test_metric_properties(random_table, random_pairs):
    """Nonnegativity, symmetry, identity and the triangle inequality"""
    for (a, b), (c, _) in zip(random_pairs, random_pairs[1:]):
        ab = wmd(a, b, random_table).distance
        ba = wmd(b, a, random_table).distance
        bc = wmd(b, c, random_table).distance
        ac = wmd(a, c, random_table).distance
        assert ab >= 0.0
        assert abs(ab - ba) <= TOL
        assert wmd(a, a, random_table).distance <= 1e-12
        assert ac <= ab + bc + TOL


def test_bound_sandwich(random_table, random_pairs):
    """WCD <= RWMD <= WMD on every pair"""
    for a, b in random_pairs:
        exact = wmd(a, b, random_table).distance
        wcd = word_centroid_distance(a, b, random_table)
        rwmd = relaxed_wmd(a, b, random_table)
        assert wcd <= rwmd + TOL
        assert rwmd <= exact + TOL


def test_relaxed_bound_keeps_centroid_bound(tiny_table):
    """Shared words with unequal weights: one-sided relaxations are 0 but WCD is not"""
    a = NBowVector(entries={0: 0.5, 1: 0.5})
    b = NBowVector(entries={0: 0.9, 1: 0.1})

    wcd = word_centroid_distance(a, b, tiny_table)

    assert wcd == pytest.approx(0.4)
    assert relaxed_wmd(a, b, tiny_table) == pytest.approx(wcd)
    assert wmd(a, b, tiny_table).distance == pytest.approx(0.4)


def test_pairwise_single_cell(tiny_table):
    """A 1x1 matrix holds the plain WMD"""
    a = NBowVector(entries={0: 1.0})
    b = NBowVector(entries={1: 0.5, 3: 0.5})

    matrix = pairwise_wmd([a], [b], tiny_table)

    assert matrix.shape == (1, 1)
    assert matrix[0, 0] == pytest.approx(wmd(a, b, tiny_table).distance)


def test_pairwise_zero_diagonal(random_table, random_pairs):
    """Targets against themselves give a zero diagonal"""
    docs = [a for a, _ in random_pairs[:6]]

    matrix = pairwise_wmd(docs, docs, random_table)

    np.testing.assert_allclose(np.diag(matrix), 0.0, atol=1e-12)


def test_pairwise_pruning_generous_budget(random_table, random_pairs):
    """With budgets above every distance, pruning changes nothing"""
    targets = [a for a, _ in random_pairs[:4]]
    candidates = [b for _, b in random_pairs[:5]]

    plain = pairwise_wmd(targets, candidates, random_table)
    pruned = pairwise_wmd(targets, candidates, random_table, prune=True, budgets=[1e6] * 4)

    np.testing.assert_array_equal(plain, pruned)


def test_pairwise_pruning_marks_skipped(tiny_table):
    """Candidates whose bound exceeds the budget hold BUDGET_EXCEEDED"""
    target = NBowVector(entries={0: 1.0})
    near = NBowVector(entries={1: 1.0})
    far = NBowVector(entries={3: 1.0})

    matrix = pairwise_wmd([target], [near, far], tiny_table, prune=True, budgets=[1.2])

    assert matrix[0, 0] == pytest.approx(1.0)
    assert matrix[0, 1] == BUDGET_EXCEEDED


def test_pairwise_errors_carry_position(tiny_table):
    """A failing cell reports its target and candidate positions"""
    good = NBowVector(entries={0: 1.0})
    outside = NBowVector(entries={7: 1.0})

    with pytest.raises(PairwiseError) as info:
        pairwise_wmd([good], [good, outside], tiny_table)

    assert (info.value.target, info.value.candidate) == (0, 1)


def test_pairwise_rejects_empty_lists(tiny_table):
    """Both sides need documents"""
    with pytest.raises(ValueError):
        pairwise_wmd([], [NBowVector(entries={0: 1.0})], tiny_table)
