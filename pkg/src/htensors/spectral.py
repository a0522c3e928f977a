"""Minimum H-eigenvalues of symmetric M-tensors.

Two independent routes are provided.  The conic route maximizes the shift
lambda for which the diagonally-shifted tensor stays in the H+ cone, a
single conic optimization with lambda entering every diagonal row.  The
oracle route writes the tensor as s*I - D with D nonnegative and runs a
power iteration for the spectral radius of D: the minimum H-eigenvalue is
then s - rho(D).  A bisection on the membership predicate serves as a
validation fallback.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conic import SolverConfig
from .errors import ConvergenceError
from .membership import Verdict, gdd_slack_program, is_m_tensor
from .multiindex import diagonal_index, is_diagonal
from .tensor import SymmetricTensor

__all__ = [
    "MTensorForm",
    "EigResult",
    "to_m_form",
    "rho_nonnegative",
    "min_h_eigenvalue_oracle",
    "min_h_eigenvalue_conic",
    "bisection_fallback",
]


@dataclass(frozen=True)
class MTensorForm:
    """Representation A = s*I - D with D entrywise nonnegative."""

    s: float
    D: SymmetricTensor


@dataclass(frozen=True)
class EigResult:
    lam: float
    method: str  # "conic" | "power_iteration"
    iterations: int
    residual: float
    perturbed: bool = False
    bracket: tuple[float, float] | None = None


def to_m_form(a: SymmetricTensor) -> MTensorForm:
    """Split a Z-tensor as s*I - D with s = max(0, max diagonal entry)."""
    if not a.is_z_tensor():
        raise ValueError("tensor has a positive off-diagonal entry; not a Z-tensor")
    diag = a.diagonal()
    s = float(max(0.0, np.max(diag))) if a.dim else 0.0
    entries = {}
    for idx, val in a.items():
        if is_diagonal(idx):
            continue
        entries[idx] = -val
    for j in range(1, a.dim + 1):
        dval = s - diag[j - 1]
        if dval != 0.0:
            entries[diagonal_index(j, a.order)] = dval
    return MTensorForm(s=s, D=SymmetricTensor(a.order, a.dim, entries))


def _power_iteration(
    d: SymmetricTensor, eps: float, tol: float, max_iter: int
) -> tuple[float, float, np.ndarray, int]:
    """Bracketing power iteration on D + eps*AllOnes + I.

    Returns (lower, upper, x, iterations) where [lower, upper] brackets the
    spectral radius of the shifted tensor; subtract 1 + the perturbation
    bias to recover bounds for D itself.
    """
    m, n = d.order, d.dim
    x = np.full(n, n ** (-1.0 / m))  # sum x_i^m = 1
    lower, upper = 0.0, np.inf
    for it in range(1, max_iter + 1):
        y = d.apply(x) + x ** (m - 1)  # diagonal unit shift keeps iterates positive
        if eps > 0.0:
            y = y + eps * np.sum(x) ** (m - 1)
        ratios = y / x ** (m - 1)
        lower = float(np.min(ratios))
        upper = float(np.max(ratios))
        if upper - lower <= tol * (1.0 + upper):
            return lower, upper, x, it
        x = y ** (1.0 / (m - 1))
        x = x / np.sum(x**m) ** (1.0 / m)
    return lower, upper, x, max_iter


def rho_nonnegative(
    d: SymmetricTensor, tol: float = 1e-10, max_iter: int = 5000
) -> EigResult:
    """Spectral radius of a symmetric nonnegative tensor by power iteration.

    Iterates x <- normalize(apply(x) ** (1/(m-1))) with per-iteration
    Rayleigh-type brackets min_i/max_i of apply(x)_i / x_i^(m-1); stops when
    the bracket closes to ``tol``.  Reducible tensors that stall are retried
    once on D + eps * AllOnes with eps = tol/10 (flagged ``perturbed``; the
    upward bias is at most eps * n**(m-1)).
    """
    if any(v < 0.0 for _, v in d.items()):
        raise ValueError("tensor has a negative entry")
    if len(d) == 0:
        raise ValueError("tensor is identically zero")
    if d.order < 2:
        raise ValueError("order must be at least 2")

    lower, upper, x, iters = _power_iteration(d, 0.0, tol, max_iter)
    perturbed = False
    if upper - lower > tol * (1.0 + upper):
        eps = tol / 10.0
        lower, upper, x, iters2 = _power_iteration(d, eps, tol, max_iter)
        iters += iters2
        perturbed = True
        if upper - lower > tol * (1.0 + upper):
            raise ConvergenceError(
                f"power iteration bracket stuck at [{lower}, {upper}] "
                f"after {iters} iterations"
            )
    # undo the unit diagonal shift
    lo, up = lower - 1.0, upper - 1.0
    lam = 0.5 * (lo + up)
    residual = float(np.max(np.abs(d.apply(x) - lam * x ** (d.order - 1))))
    return EigResult(
        lam=lam,
        method="power_iteration",
        iterations=iters,
        residual=residual,
        perturbed=perturbed,
        bracket=(lo, up),
    )


def min_h_eigenvalue_oracle(
    a: SymmetricTensor, tol: float = 1e-10, max_iter: int = 5000
) -> float:
    """Minimum H-eigenvalue of a symmetric Z-tensor as s - rho(D)."""
    form = to_m_form(a)
    if len(form.D) == 0:  # a = s*I exactly
        return float(np.min(a.diagonal()))
    rho = rho_nonnegative(form.D, tol=tol, max_iter=max_iter)
    return form.s - rho.lam


def min_h_eigenvalue_conic(
    a: SymmetricTensor, config: SolverConfig | None = None
) -> EigResult:
    """Minimum H-eigenvalue of a symmetric M-tensor by one conic solve.

    Solves max{lambda : shifted membership system feasible} with lambda
    entering every diagonal row.  The input must be an M-tensor (Z-tensor
    whose membership slack is nonnegative up to tolerance); boundary
    M-tensors are accepted.
    """
    cfg = config or SolverConfig()
    if not a.is_z_tensor():
        raise ValueError("not an M-tensor: positive off-diagonal entry present")
    diag = a.diagonal()
    if np.any(diag < 0.0):
        raise ValueError("not an M-tensor: negative diagonal entry")
    tstar, res, _ = gdd_slack_program(a, cfg)
    thr = 10.0 * cfg.feas_tol * max(1.0, float(np.max(np.abs(diag))))
    if tstar < -thr:
        raise ValueError(
            f"not an M-tensor: membership slack {tstar:.6e} is negative"
        )
    worst = max(res.residuals.primal, res.residuals.dual, res.residuals.gap)
    return EigResult(
        lam=tstar, method="conic", iterations=res.iterations, residual=worst
    )


def bisection_fallback(
    a: SymmetricTensor,
    lo: float | None = None,
    hi: float | None = None,
    tol: float = 1e-6,
    config: SolverConfig | None = None,
) -> float:
    """Bisect on M-tensor membership of the diagonally shifted tensor.

    The feasible shifts form a downward ray, so membership of a - mid*I is
    monotone in mid.  Defaults: hi = smallest diagonal entry, lo = hi minus
    the largest off-diagonal row sum.  Marginal verdicts count as feasible
    (the cone is closed).
    """
    cfg = config or SolverConfig()
    diag = a.diagonal()
    if hi is None:
        hi = float(np.min(diag))
    if lo is None:
        lo = hi - float(np.max(a.row_offdiagonal_abs_sums()))
    if lo > hi:
        raise ValueError(f"invalid bracket [{lo}, {hi}]")

    def feasible(lam: float) -> bool:
        verdict = is_m_tensor(a.add_identity(-lam), cfg)
        return verdict.kind in (Verdict.MEMBER, Verdict.MARGINAL)

    if not feasible(lo):
        raise ValueError(f"lower bracket {lo} is not feasible")
    if feasible(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
