from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antisym.permutations import ENUMERATION_CAP, CapacityError, iter_permutations, parity, permutation_table


@pytest.mark.parametrize("n", range(1, 8))
def test_table_lists_every_permutation_once(n):
    table = permutation_table(n)
    assert table.shape == (math.factorial(n), n)
    assert {tuple(r) for r in table} == set(itertools.permutations(range(n)))


@pytest.mark.parametrize("n", range(2, 8))
def test_consecutive_rows_differ_by_adjacent_swap(n):
    table = permutation_table(n)
    diff = table[1:] != table[:-1]
    assert np.all(diff.sum(axis=1) == 2)
    # the two changed positions are neighbours
    pos = np.argwhere(diff)[:, 1].reshape(-1, 2)
    assert np.all(pos[:, 1] - pos[:, 0] == 1)


@pytest.mark.parametrize("n", [3, 6, 9])
def test_alternating_signs_match_parity(n):
    total = 0
    for perms, signs in iter_permutations(n, chunk=5000):
        idx = np.linspace(0, len(perms) - 1, 20).astype(int)
        assert all(parity(perms[i]) == signs[i] for i in idx)
        total += len(perms)
    assert total == math.factorial(n)


def test_beyond_table_size_counts_and_signs():
    seen = 0
    sign_sum = 0.0
    for perms, signs in iter_permutations(11, chunk=1 << 20):
        seen += len(perms)
        sign_sum += signs.sum()
        assert parity(perms[0]) == signs[0] and parity(perms[-1]) == signs[-1]
    assert seen == math.factorial(11)
    assert sign_sum == 0


def test_table_is_read_only():
    with pytest.raises(ValueError):
        permutation_table(4)[0, 0] = 3


def test_cap():
    with pytest.raises(CapacityError):
        next(iter_permutations(ENUMERATION_CAP + 1))


@given(st.permutations(list(range(7))))
@settings(max_examples=50, deadline=None)
def test_parity_is_a_homomorphism(perm):
    p = np.array(perm)
    q = np.roll(np.arange(7), 1)
    assert parity(p[q]) == parity(p) * parity(q)
