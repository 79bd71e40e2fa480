"""Minimal-change permutation tables.

Permutations are listed in Steinhaus-Johnson-Trotter order: consecutive rows
differ by one adjacent transposition, so the sign simply alternates
``+1, -1, +1, ...`` along the table and never has to be recomputed.
"""

from __future__ import annotations

import math
from collections.abc import Iterator
from functools import lru_cache

import numpy as np

#: Largest n for which a full table is materialized and cached (10! rows).
TABLE_MAX = 10
#: Hard cap for explicit enumeration.
ENUMERATION_CAP = 12


class CapacityError(ValueError):
    """Raised when explicit enumeration over n! permutations is requested past the cap."""


def _extend(prev: np.ndarray, first_row: int) -> np.ndarray:
    """Insert the new largest element into every row of ``prev``.

    ``first_row`` is the global index of ``prev[0]`` inside the full table of
    the smaller size; its parity decides the sweep direction of the new
    element (right-to-left on even rows, left-to-right on odd rows).
    """
    rows, k = prev.shape
    inserted = np.empty((k + 1, rows, k + 1), dtype=np.int8)
    for pos in range(k + 1):
        inserted[pos, :, :pos] = prev[:, :pos]
        inserted[pos, :, pos] = k
        inserted[pos, :, pos + 1 :] = prev[:, pos:]
    even = (first_row + np.arange(rows)) % 2 == 0
    out = np.empty((rows, k + 1, k + 1), dtype=np.int8)
    for step in range(k + 1):
        out[even, step] = inserted[k - step][even]
        out[~even, step] = inserted[step][~even]
    return out.reshape(rows * (k + 1), k + 1)


@lru_cache(maxsize=None)
def _table(n: int) -> np.ndarray:
    perms = np.zeros((1, 0), dtype=np.int8)
    for _ in range(n):
        perms = _extend(perms, 0)
    perms.setflags(write=False)
    return perms


def permutation_table(n: int) -> np.ndarray:
    """All n! permutations of ``range(n)`` in minimal-change order, shape (n!, n).

    Row ``r`` has sign ``(-1)**r``. Cached and read-only; only for ``n <= TABLE_MAX``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > TABLE_MAX:
        raise CapacityError(f"full table limited to n <= {TABLE_MAX}; use iter_permutations")
    return _table(n)


def alternating_signs(start: int, count: int) -> np.ndarray:
    return np.where((start + np.arange(count)) % 2 == 0, 1.0, -1.0)


def iter_permutations(n: int, chunk: int = 1 << 16) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(perms, signs)`` blocks covering all n! permutations in order.

    For n above ``TABLE_MAX`` the blocks are grown on the fly from slices of
    the cached ``TABLE_MAX`` table, so memory stays bounded.
    """
    if n > ENUMERATION_CAP:
        raise CapacityError(f"explicit antisymmetrization is capped at n = {ENUMERATION_CAP}, got {n}")
    if n <= TABLE_MAX:
        table = permutation_table(n)
        for start in range(0, table.shape[0], chunk):
            block = table[start : start + chunk]
            yield block, alternating_signs(start, block.shape[0])
        return
    base = permutation_table(TABLE_MAX)
    growth = math.prod(range(TABLE_MAX + 1, n + 1))
    base_chunk = max(1, chunk // growth)
    for start in range(0, base.shape[0], base_chunk):
        block = base[start : start + base_chunk]
        first = start
        for k in range(TABLE_MAX, n):
            block = _extend(block, first)
            first *= k + 1
        yield block, alternating_signs(first, block.shape[0])


def parity(perm: np.ndarray) -> int:
    """Sign of a permutation given in one-line notation, via cycle counting."""
    perm = np.asarray(perm)
    seen = np.zeros(perm.size, dtype=bool)
    sign = 1
    for start in range(perm.size):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign
