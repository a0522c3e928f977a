"""Multi-index combinatorics for sparse symmetric tensors.

Entries of an order-m, dimension-n symmetric tensor are addressed by
multi-indices (i1, ..., im) with 1-based coordinates.  Symmetry makes every
permutation of a multi-index equivalent, so each permutation class is
represented by its sorted member.  This module provides canonical
representatives, their run-length encoding into (distinct indices, powers),
and the exact permutation counts needed to expand per-class storage into
full symmetric sums.
"""

from __future__ import annotations

import itertools
import math
import operator
from typing import Iterable, NamedTuple

MultiIndex = tuple[int, ...]

__all__ = [
    "MultiIndex",
    "TightPair",
    "canonicalize",
    "is_diagonal",
    "diagonal_index",
    "enumerate_offdiagonal",
    "tight_pair",
    "multinomial",
    "num_permutations",
    "slice_count",
    "dominance_constant",
]


def multinomial(total: int, parts: Iterable[int]) -> int:
    """Exact multinomial coefficient total! / prod(parts!)."""
    parts = tuple(parts)
    if any(p < 0 for p in parts) or sum(parts) != total:
        raise ValueError(f"parts {parts} must be nonnegative and sum to {total}")
    out = math.factorial(total)
    for p in parts:
        out //= math.factorial(p)
    return out


def canonicalize(raw_index: Iterable[int], n: int) -> MultiIndex:
    """Sorted copy of ``raw_index`` with every entry validated to lie in [1, n].

    Idempotent and invariant under permutations of the input.  Raises
    IndexError for out-of-range entries.
    """
    idx = tuple(sorted(operator.index(i) for i in raw_index))
    if not idx:
        raise ValueError("multi-index must have at least one entry")
    if idx[0] < 1 or idx[-1] > n:
        raise IndexError(f"multi-index {idx} has entries outside [1, {n}]")
    return idx


def is_diagonal(idx: MultiIndex) -> bool:
    """True when all entries of the multi-index coincide."""
    return idx[0] == idx[-1]


def diagonal_index(j: int, order: int) -> MultiIndex:
    """The diagonal multi-index (j, j, ..., j) of the given order."""
    return (j,) * order


def enumerate_offdiagonal(n: int, m: int) -> list[MultiIndex]:
    """All canonical multi-indices with at least two distinct entries.

    Returned in lexicographic order; the count is C(n+m-1, m) - n.
    """
    if m < 2:
        raise ValueError(f"order m must be at least 2, got {m}")
    if n < 1:
        raise ValueError(f"dimension n must be at least 1, got {n}")
    return [
        idx
        for idx in itertools.combinations_with_replacement(range(1, n + 1), m)
        if idx[0] != idx[-1]
    ]


class TightPair(NamedTuple):
    """Run-length encoding of a canonical multi-index.

    ``distinct`` holds the strictly increasing distinct indices and
    ``powers`` their multiplicities; the powers sum to the order m.
    """

    distinct: tuple[int, ...]
    powers: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.distinct)

    def rebuild(self) -> MultiIndex:
        """The sorted multi-index this pair encodes."""
        out: list[int] = []
        for j, p in zip(self.distinct, self.powers):
            out.extend([j] * p)
        return tuple(out)


def _require_canonical(idx: MultiIndex) -> None:
    if any(a > b for a, b in zip(idx, idx[1:])):
        raise ValueError(f"multi-index {idx} is not canonical (sorted)")


def tight_pair(idx: MultiIndex) -> TightPair:
    """Run-length encode a canonical multi-index into (distinct, powers)."""
    _require_canonical(idx)
    distinct = []
    powers = []
    for j, group in itertools.groupby(idx):
        distinct.append(j)
        powers.append(sum(1 for _ in group))
    return TightPair(tuple(distinct), tuple(powers))


def num_permutations(idx: MultiIndex) -> int:
    """Number of distinct permutations of the multi-index, m! / prod(powers!)."""
    tp = tight_pair(idx)
    return multinomial(len(idx), tp.powers)


def slice_count(idx: MultiIndex, k: int) -> int:
    """Permutations of the trailing m-1 slots once one copy of the k-th
    distinct index is pinned to the leading slot.

    ``k`` is 1-based into the distinct-index list of the tight pair; the
    value is (m-1)! / prod over t of (powers_t - [t == k])!.
    """
    tp = tight_pair(idx)
    if not 1 <= k <= tp.length:
        raise ValueError(f"slot k={k} outside [1, {tp.length}] for index {idx}")
    reduced = list(tp.powers)
    reduced[k - 1] -= 1
    return multinomial(len(idx) - 1, reduced)


def dominance_constant(idx: MultiIndex) -> int:
    """Product over distinct indices of slice_count(idx, k) ** powers[k].

    This is the exact combinatorial constant appearing on the modulus side
    of the scaled diagonal-dominance inequality for a sparse symmetric
    tensor supported on one off-diagonal permutation class.  Computed in
    exact integer arithmetic; grows combinatorially with the order.
    """
    tp = tight_pair(idx)
    if tp.length < 2:
        raise ValueError(f"multi-index {idx} is diagonal; constant undefined")
    out = 1
    for k, p in enumerate(tp.powers, start=1):
        out *= slice_count(idx, k) ** p
    return out
