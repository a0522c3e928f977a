"""Shared fixtures and independent dense-tensor oracles for the tests."""

import itertools

import numpy as np
import pytest

from htensors import SymmetricTensor


@pytest.fixture
def example_tensor():
    """The running order-4, dimension-2 example used throughout the suite."""
    return SymmetricTensor(
        4,
        2,
        {
            (1, 1, 1, 1): 4.0,
            (1, 1, 1, 2): -2.0,
            (1, 1, 2, 2): -1.0,
            (1, 2, 2, 2): 64.0 / 3.0,
            (2, 2, 2, 2): 1000.0,
        },
    )


def dense_from_sparse(a: SymmetricTensor) -> np.ndarray:
    """Materialize the full symmetric array (test oracle only)."""
    full = np.zeros((a.dim,) * a.order)
    for idx, val in a.items():
        for perm in set(itertools.permutations(idx)):
            full[tuple(i - 1 for i in perm)] = val
    return full


def dense_evaluate(full: np.ndarray, x: np.ndarray) -> float:
    out = full
    for _ in range(full.ndim):
        out = out @ x
    return float(out)


def dense_apply(full: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = full
    for _ in range(full.ndim - 1):
        out = out @ x
    return np.asarray(out)


def dense_row_offdiag_abs_sums(full: np.ndarray) -> np.ndarray:
    n = full.shape[0]
    m = full.ndim
    sums = np.zeros(n)
    for i in range(n):
        for rest in itertools.product(range(n), repeat=m - 1):
            if all(r == i for r in rest):
                continue
            sums[i] += abs(full[(i,) + rest])
    return sums


def random_sparse_tensor(m, n, rng, density=1.0, scale=1.0):
    """Random symmetric tensor over all canonical indices."""
    entries = {}
    for idx in itertools.combinations_with_replacement(range(1, n + 1), m):
        if rng.uniform() <= density:
            entries[idx] = rng.normal() * scale
    return SymmetricTensor(m, n, entries)


def random_dd_plus_tensor(m, n, rng, margin=(0.05, 0.5)):
    """Random strictly diagonally dominant tensor with positive diagonal."""
    a = random_sparse_tensor(m, n, rng)
    entries = {idx: v for idx, v in a.items() if idx[0] != idx[-1]}
    body = SymmetricTensor(m, n, entries)
    sums = body.row_offdiagonal_abs_sums()
    lo, hi = margin
    diag = {
        (j,) * m: sums[j - 1] * (1.0 + rng.uniform(lo, hi)) + 0.1
        for j in range(1, n + 1)
    }
    return body + SymmetricTensor(m, n, diag)
