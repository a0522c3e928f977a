"""Sparse symmetric tensors stored by canonical multi-index.

A tensor of order m and dimension n keeps one coefficient per permutation
class, keyed by the sorted multi-index.  All operations (evaluation, the
tensor-vector product, comparison tensor, diagonal scaling, dominance
tests) expand permutation classes with exact multinomial counts instead of
materializing the dense array.  Instances are immutable after construction
and safe to share across threads.
"""

from __future__ import annotations

import numpy as np

from .multiindex import (
    MultiIndex,
    canonicalize,
    diagonal_index,
    is_diagonal,
    num_permutations,
    slice_count,
    tight_pair,
)

__all__ = [
    "DiagonalScaling",
    "SymmetricTensor",
    "allclose",
    "tensor_to_json_dict",
    "tensor_from_json_dict",
]

# Duplicate raw entries must agree to this relative tolerance.
_MERGE_RTOL = 1e-12


class DiagonalScaling:
    """Strictly positive per-coordinate scaling vector.

    Zero or negative components are rejected at construction.
    """

    __slots__ = ("d",)

    def __init__(self, d):
        arr = np.atleast_1d(np.asarray(d, dtype=float))
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("scaling must be a nonempty vector")
        if not np.all(np.isfinite(arr)) or not np.all(arr > 0.0):
            raise ValueError("scaling components must be finite and strictly positive")
        self.d = arr
        self.d.setflags(write=False)

    def __len__(self) -> int:
        return self.d.size

    def inverse(self) -> "DiagonalScaling":
        return DiagonalScaling(1.0 / self.d)

    def __repr__(self) -> str:
        return f"DiagonalScaling({self.d.tolist()})"


def _as_scaling(d, n: int) -> np.ndarray:
    vec = d.d if isinstance(d, DiagonalScaling) else DiagonalScaling(d).d
    if vec.size != n:
        raise ValueError(f"scaling has length {vec.size}, expected {n}")
    return vec


class SymmetricTensor:
    """Order-m, dimension-n symmetric tensor with sparse canonical storage."""

    __slots__ = ("order", "dim", "_entries", "_eval_table", "_apply_table")

    def __init__(self, order: int, dim: int, entries=None):
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.order = int(order)
        self.dim = int(dim)
        merged: dict[MultiIndex, float] = {}
        if entries:
            for raw, val in entries.items() if hasattr(entries, "items") else entries:
                idx = canonicalize(raw, dim)
                if len(idx) != order:
                    raise ValueError(f"index {idx} has length {len(idx)}, expected {order}")
                val = float(val)
                if idx in merged:
                    prev = merged[idx]
                    if abs(prev - val) > _MERGE_RTOL * max(1.0, abs(prev), abs(val)):
                        raise ValueError(
                            f"conflicting duplicate entries at {idx}: {prev} vs {val}"
                        )
                else:
                    merged[idx] = val
        self._entries = {k: v for k, v in sorted(merged.items()) if v != 0.0}
        self._eval_table = None
        self._apply_table = None

    # -- basic access ------------------------------------------------------

    @property
    def entries(self) -> dict[MultiIndex, float]:
        """Canonical entry map (treat as read-only)."""
        return self._entries

    def items(self):
        return self._entries.items()

    def __len__(self) -> int:
        return len(self._entries)

    def __getitem__(self, raw_idx) -> float:
        return self._entries.get(canonicalize(raw_idx, self.dim), 0.0)

    def diagonal(self) -> np.ndarray:
        m = self.order
        return np.array(
            [self._entries.get(diagonal_index(j, m), 0.0) for j in range(1, self.dim + 1)]
        )

    def max_abs(self) -> float:
        return max((abs(v) for v in self._entries.values()), default=0.0)

    @staticmethod
    def identity(order: int, dim: int) -> "SymmetricTensor":
        """Diagonal tensor with unit diagonal."""
        return SymmetricTensor(
            order, dim, {diagonal_index(j, order): 1.0 for j in range(1, dim + 1)}
        )

    def __repr__(self) -> str:
        return (
            f"SymmetricTensor(order={self.order}, dim={self.dim}, "
            f"nnz={len(self._entries)})"
        )

    # -- algebra -----------------------------------------------------------

    def _check_same_shape(self, other: "SymmetricTensor") -> None:
        if self.order != other.order or self.dim != other.dim:
            raise ValueError(
                f"shape mismatch: ({self.order},{self.dim}) vs ({other.order},{other.dim})"
            )

    def __add__(self, other: "SymmetricTensor") -> "SymmetricTensor":
        self._check_same_shape(other)
        out = dict(self._entries)
        for idx, v in other.items():
            out[idx] = out.get(idx, 0.0) + v
        return SymmetricTensor(self.order, self.dim, out)

    def __sub__(self, other: "SymmetricTensor") -> "SymmetricTensor":
        return self + (-1.0) * other

    def __rmul__(self, scalar: float) -> "SymmetricTensor":
        s = float(scalar)
        return SymmetricTensor(
            self.order, self.dim, {idx: s * v for idx, v in self._entries.items()}
        )

    __mul__ = __rmul__

    def __neg__(self) -> "SymmetricTensor":
        return (-1.0) * self

    def add_identity(self, c: float) -> "SymmetricTensor":
        """The tensor with c added to every diagonal entry."""
        out = dict(self._entries)
        for j in range(1, self.dim + 1):
            key = diagonal_index(j, self.order)
            out[key] = out.get(key, 0.0) + float(c)
        return SymmetricTensor(self.order, self.dim, out)

    # -- evaluation --------------------------------------------------------

    def _eval_tables(self):
        if self._eval_table is None:
            coefs = []
            cols = []
            pows = []
            for idx, a in self._entries.items():
                tp = tight_pair(idx)
                coefs.append(num_permutations(idx) * a)
                cols.append(np.array([j - 1 for j in tp.distinct], dtype=np.intp))
                pows.append(np.array(tp.powers, dtype=np.int64))
            self._eval_table = (np.array(coefs, dtype=float), cols, pows)
        return self._eval_table

    def evaluate(self, x) -> float:
        """Full symmetric contraction against x in every slot."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"x has shape {x.shape}, expected ({self.dim},)")
        coefs, cols, pows = self._eval_tables()
        total = 0.0
        for c, cl, pw in zip(coefs, cols, pows):
            total += c * np.prod(x[cl] ** pw)
        return float(total)

    def evaluate_many(self, X) -> np.ndarray:
        """Vectorized evaluate over the rows of X (shape (k, n))."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise ValueError(f"X has shape {X.shape}, expected (k, {self.dim})")
        coefs, cols, pows = self._eval_tables()
        out = np.zeros(X.shape[0])
        for c, cl, pw in zip(coefs, cols, pows):
            out += c * np.prod(X[:, cl] ** pw, axis=1)
        return out

    def _apply_tables(self):
        if self._apply_table is None:
            rows = []
            coefs = []
            cols = []
            pows = []
            for idx, a in self._entries.items():
                tp = tight_pair(idx)
                for k, (j, p) in enumerate(zip(tp.distinct, tp.powers), start=1):
                    rows.append(j - 1)
                    coefs.append(slice_count(idx, k) * a)
                    reduced = list(tp.powers)
                    reduced[k - 1] -= 1
                    cl = [jj - 1 for jj, pp in zip(tp.distinct, reduced) if pp > 0]
                    pw = [pp for pp in reduced if pp > 0]
                    cols.append(np.array(cl, dtype=np.intp))
                    pows.append(np.array(pw, dtype=np.int64))
            self._apply_table = (
                np.array(rows, dtype=np.intp),
                np.array(coefs, dtype=float),
                cols,
                pows,
            )
        return self._apply_table

    def apply(self, x) -> np.ndarray:
        """Symmetric tensor-vector product contracting all but the first slot.

        Satisfies x . apply(x) == evaluate(x).
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"x has shape {x.shape}, expected ({self.dim},)")
        rows, coefs, cols, pows = self._apply_tables()
        out = np.zeros(self.dim)
        for r, c, cl, pw in zip(rows, coefs, cols, pows):
            out[r] += c * np.prod(x[cl] ** pw)
        return out

    # -- structure ---------------------------------------------------------

    def comparison(self) -> "SymmetricTensor":
        """Comparison tensor: |diagonal| on the diagonal, -|entry| off it."""
        out = {}
        for idx, v in self._entries.items():
            out[idx] = abs(v) if is_diagonal(idx) else -abs(v)
        return SymmetricTensor(self.order, self.dim, out)

    def scale(self, d) -> "SymmetricTensor":
        """Multiply the entry at (i1, ..., im) by d[i1] * ... * d[im], d > 0."""
        vec = _as_scaling(d, self.dim)
        out = {}
        for idx, v in self._entries.items():
            factor = 1.0
            for j, p in zip(*tight_pair(idx)):
                factor *= vec[j - 1] ** p
            out[idx] = v * factor
        return SymmetricTensor(self.order, self.dim, out)

    def row_offdiagonal_abs_sums(self) -> np.ndarray:
        """Per-row sums of |entry| over the full symmetric off-diagonal slice.

        Each canonical off-diagonal entry is counted with its exact
        permutation multiplicity within the row's slice.
        """
        sums = np.zeros(self.dim)
        for idx, v in self._entries.items():
            if is_diagonal(idx):
                continue
            tp = tight_pair(idx)
            for k, j in enumerate(tp.distinct, start=1):
                sums[j - 1] += slice_count(idx, k) * abs(v)
        return sums

    def is_dd(self) -> bool:
        """Diagonal dominance: |diag| covers each row's off-diagonal abs sum."""
        return bool(np.all(np.abs(self.diagonal()) >= self.row_offdiagonal_abs_sums()))

    def is_dd_plus(self) -> bool:
        """Diagonal dominance with a nonnegative diagonal."""
        diag = self.diagonal()
        return bool(np.all(diag >= 0.0)) and bool(
            np.all(diag >= self.row_offdiagonal_abs_sums())
        )

    def is_z_tensor(self) -> bool:
        """True when every off-diagonal entry is nonpositive."""
        return all(v <= 0.0 for idx, v in self._entries.items() if not is_diagonal(idx))


def allclose(a: SymmetricTensor, b: SymmetricTensor, atol=1e-12, rtol=1e-12) -> bool:
    """Entrywise closeness of two tensors of the same shape."""
    if a.order != b.order or a.dim != b.dim:
        return False
    keys = set(a.entries) | set(b.entries)
    for k in keys:
        va, vb = a.entries.get(k, 0.0), b.entries.get(k, 0.0)
        if abs(va - vb) > atol + rtol * max(abs(va), abs(vb)):
            return False
    return True


def tensor_to_json_dict(a: SymmetricTensor) -> dict:
    """JSON form: {"order": m, "dim": n, "entries": [{"idx": [...], "val": v}]}."""
    return {
        "order": a.order,
        "dim": a.dim,
        "entries": [
            {"idx": list(idx), "val": val} for idx, val in sorted(a.items())
        ],
    }


def tensor_from_json_dict(data: dict) -> SymmetricTensor:
    """Parse the JSON tensor form; unsorted indices are canonicalized and
    omitted entries are zero."""
    try:
        order = int(data["order"])
        dim = int(data["dim"])
        raw = data.get("entries", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed tensor JSON: {exc}") from exc
    pairs = []
    for item in raw:
        try:
            pairs.append((tuple(item["idx"]), float(item["val"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed tensor entry {item!r}: {exc}") from exc
    return SymmetricTensor(order, dim, pairs)
