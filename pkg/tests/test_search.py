from math import ceil

import numpy as np
import pytest

from dostbc.codebook import expected_length
from dostbc.search import (SearchBudgetError, column_types, enumeration_bound,
                           min_length_search)
from dostbc.verifier import check_structural, verify


def test_type_count():
    # N K plain + N K conjugate + mixed with distinct relays and four phases
    for n, k in [(1, 1), (2, 2), (3, 2), (2, 4)]:
        expect = 2 * n * k + 4 * n * k * n * (k - 1)
        assert len(column_types(n, k)) == expect


def test_types_sorted_and_unique():
    t = column_types(2, 3)
    assert len({tuple(r) for r in t.tolist()}) == len(t)
    assert t.tolist() == sorted(t.tolist())


@pytest.mark.parametrize("n, k", [(2, 2), (3, 2), (2, 3), (3, 3), (4, 2), (2, 4)])
def test_constructions_have_minimum_length(n, k):
    t = expected_length(n, k)
    res = min_length_search(n, k, t, budget=10 ** 20)
    assert res.length == t
    assert verify(res.witness).verdict == "row_monomial_dostbc"
    assert check_structural(res.witness).row_monomial
    assert all(v > 0 for v in res.nodes.values())


def test_floor_is_tight_in_even_domain():
    res = min_length_search(2, 2, 4)
    assert res.length == ceil(2 * 2 / 2) == expected_length(2, 2)


def test_floor_is_loose_for_single_symbol():
    res = min_length_search(1, 2, 4)
    assert res.length == 2 > ceil(1 * 2 / 2)


def test_not_found_below_minimum():
    res = min_length_search(3, 2, 3)
    assert not res.found and res.witness is None
    assert sorted(res.nodes) == [1, 2, 3]


def test_witness_is_canonical():
    w = min_length_search(2, 2, 2).witness
    cols = np.concatenate([w.a_stack, w.b_stack]).reshape(-1, w.length).T
    for col in cols:
        nz = col[col != 0]
        assert nz[0] == 1


def test_budget():
    assert enumeration_bound(2, 2, 2) == 40 + 780
    with pytest.raises(SearchBudgetError):
        min_length_search(4, 4, 8)
    with pytest.raises(SearchBudgetError):
        min_length_search(2, 2, 4, budget=100)
    with pytest.raises(ValueError):
        min_length_search(0, 2, 2)
