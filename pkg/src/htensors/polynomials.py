"""Homogeneous polynomials, their symmetric coefficient tensors, and
tractable nonnegativity-based lower bounds.

A degree-m form over n variables corresponds one-to-one to a symmetric
order-m tensor through multinomial rescaling of coefficients.  Membership
of the tensor in the diagonally dominant (DD+) or generalized diagonally
dominant (GDD+/H+) cone certifies nonnegativity of the form for even m,
which yields two lower bounds for the minimum of A x^m over the unit
m-norm sphere: a closed-form row-sum bound (with an LP cross-check) and a
conic bound reusing the membership machinery.  The fourth-degree basis
forms additionally admit explicit weighted-square decompositions, verified
here in exact arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy as sp
from scipy.optimize import linprog

from .conic import SolverConfig
from .membership import MembershipVerdict, gdd_slack_program, is_h_plus
from .multiindex import (
    MultiIndex,
    dominance_constant,
    is_diagonal,
    multinomial,
    slice_count,
    tight_pair,
)
from .tensor import SymmetricTensor

__all__ = [
    "HomogeneousPolynomial",
    "SquareDecomposition",
    "poly_from_tensor",
    "tensor_from_poly",
    "exp_to_index",
    "index_to_exp",
    "dd_basis_form",
    "gdd_basis_form",
    "is_ddth",
    "is_gddth",
    "lower_bound_ddth",
    "lower_bound_gddth",
    "sampled_upper_bound",
    "appendix_identity",
    "poly_to_json_dict",
    "poly_from_json_dict",
]


@dataclass(frozen=True)
class HomogeneousPolynomial:
    """Degree-m form over n variables keyed by exponent vector."""

    degree: int
    nvars: int
    coeffs: dict[tuple[int, ...], float]

    def __post_init__(self):
        clean = {}
        for exp, c in self.coeffs.items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != self.nvars or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent vector {exp} for nvars={self.nvars}")
            if sum(exp) != self.degree:
                raise ValueError(f"exponent {exp} does not sum to degree {self.degree}")
            c = float(c)
            if c != 0.0:
                clean[exp] = clean.get(exp, 0.0) + c
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.nvars,):
            raise ValueError(f"x has shape {x.shape}, expected ({self.nvars},)")
        total = 0.0
        for exp, c in self.coeffs.items():
            total += c * np.prod(x ** np.array(exp))
        return float(total)

    def __add__(self, other: "HomogeneousPolynomial") -> "HomogeneousPolynomial":
        if (self.degree, self.nvars) != (other.degree, other.nvars):
            raise ValueError("degree/nvars mismatch")
        out = dict(self.coeffs)
        for exp, c in other.coeffs.items():
            out[exp] = out.get(exp, 0.0) + c
        return HomogeneousPolynomial(self.degree, self.nvars, out)

    def __rmul__(self, scalar: float) -> "HomogeneousPolynomial":
        s = float(scalar)
        return HomogeneousPolynomial(
            self.degree, self.nvars, {e: s * c for e, c in self.coeffs.items()}
        )

    __mul__ = __rmul__


def index_to_exp(idx: MultiIndex, nvars: int) -> tuple[int, ...]:
    exp = [0] * nvars
    for i in idx:
        exp[i - 1] += 1
    return tuple(exp)


def exp_to_index(exp) -> MultiIndex:
    out = []
    for pos, e in enumerate(exp, start=1):
        out.extend([pos] * int(e))
    return tuple(out)


def poly_from_tensor(a: SymmetricTensor) -> HomogeneousPolynomial:
    """The form A x^m; coefficient of x^exp is multinomial(m; exp) * a_idx."""
    coeffs = {}
    for idx, val in a.items():
        tp = tight_pair(idx)
        coeffs[index_to_exp(idx, a.dim)] = multinomial(a.order, tp.powers) * val
    return HomogeneousPolynomial(a.order, a.dim, coeffs)


def tensor_from_poly(p: HomogeneousPolynomial) -> SymmetricTensor:
    """The unique symmetric coefficient tensor of a homogeneous form."""
    entries = {}
    for exp, c in p.coeffs.items():
        idx = exp_to_index(exp)
        entries[idx] = c / multinomial(p.degree, tight_pair(idx).powers)
    return SymmetricTensor(p.degree, p.nvars, entries)


# -- numeric adapters for float vs exact coefficient arithmetic ---------------


class _FloatOps:
    exact = False

    @staticmethod
    def of(v):
        return float(v)

    @staticmethod
    def sqrt(v):
        return math.sqrt(v)

    @staticmethod
    def root(v, k):
        return float(v) ** (1.0 / k)


class _ExactOps:
    exact = True

    @staticmethod
    def of(v):
        return sp.Rational(Fraction(v))

    @staticmethod
    def sqrt(v):
        return sp.sqrt(v)

    @staticmethod
    def root(v, k):
        return sp.root(v, k)


def _sign_value(sign) -> int:
    if sign in (1, +1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def _basis_coeffs(idx: MultiIndex, sign: int, beta, nvars: int, ops):
    """Coefficient map of sum_k beta_k x_{j_k}^m +/- binom(m;alpha) * m(i) *
    x_{i1}...x_{im} with m(i) = (prod beta^alpha / prod slice^alpha)^(1/m)."""
    tp = tight_pair(idx)
    m = len(idx)
    slices = [slice_count(idx, k) for k in range(1, tp.length + 1)]
    if beta is None:
        beta_vals = [ops.of(s) for s in slices]
        mi = ops.of(1)
    else:
        if len(beta) != tp.length:
            raise ValueError(
                f"beta has {len(beta)} entries, expected {tp.length} for {idx}"
            )
        beta_vals = [ops.of(bk) for bk in beta]
        num = ops.of(1)
        den = ops.of(1)
        for bk, sk, p in zip(beta_vals, slices, tp.powers):
            num = num * bk**p
            den = den * ops.of(sk) ** p
        mi = ops.root(num / den, m)
    coeffs: dict[tuple[int, ...], object] = {}
    for j, bk in zip(tp.distinct, beta_vals):
        exp = [0] * nvars
        exp[j - 1] = m
        coeffs[tuple(exp)] = coeffs.get(tuple(exp), ops.of(0)) + bk
    mono = index_to_exp(idx, nvars)
    term = ops.of(sign * multinomial(m, tp.powers)) * mi
    coeffs[mono] = coeffs.get(mono, ops.of(0)) + term
    return coeffs


def dd_basis_form(idx: MultiIndex, sign, nvars: int | None = None) -> HomogeneousPolynomial:
    """Extreme diagonally dominant basis form: slice-count diagonal terms
    plus/minus the full symmetrized monomial of ``idx``."""
    sgn = _sign_value(sign)
    tp = tight_pair(idx)
    if tp.length < 2:
        raise ValueError(f"index {idx} is diagonal")
    n = nvars if nvars is not None else max(idx)
    coeffs = _basis_coeffs(idx, sgn, None, n, _FloatOps)
    return HomogeneousPolynomial(len(idx), n, coeffs)


def gdd_basis_form(
    idx: MultiIndex, sign, beta, nvars: int | None = None
) -> HomogeneousPolynomial:
    """Scaled basis form with nonnegative diagonal weights ``beta``; reduces
    to ``dd_basis_form`` when beta equals the slice counts."""
    sgn = _sign_value(sign)
    tp = tight_pair(idx)
    if tp.length < 2:
        raise ValueError(f"index {idx} is diagonal")
    beta = list(beta)
    if any(bk < 0 for bk in beta):
        raise ValueError("beta weights must be nonnegative")
    n = nvars if nvars is not None else max(idx)
    coeffs = _basis_coeffs(idx, sgn, beta, n, _FloatOps)
    return HomogeneousPolynomial(len(idx), n, coeffs)


def is_ddth(p: HomogeneousPolynomial) -> bool:
    """Is the symmetric coefficient tensor diagonally dominant with
    nonnegative diagonal?"""
    return tensor_from_poly(p).is_dd_plus()


def is_gddth(
    p: HomogeneousPolynomial, config: SolverConfig | None = None
) -> MembershipVerdict:
    """H+ membership verdict for the symmetric coefficient tensor."""
    return is_h_plus(tensor_from_poly(p), config)


def lower_bound_ddth(a: SymmetricTensor, method: str = "closed") -> float:
    """max{lambda : subtracting lambda*I keeps the tensor DD+}.

    The closed form is min over rows of (diagonal - off-diagonal absolute
    row sum).  ``method='lp'`` solves the equivalent linear program with
    absolute-value split variables as an independent cross-check.
    """
    if a.order % 2 != 0:
        raise ValueError("even order required for a nonnegativity bound")
    closed = float(np.min(a.diagonal() - a.row_offdiagonal_abs_sums()))
    if method == "closed":
        return closed
    if method != "lp":
        raise ValueError(f"unknown method {method!r}")
    offdiag = [(idx, val) for idx, val in a.items() if not is_diagonal(idx)]
    nz = len(offdiag)
    # variables: [lambda, z_1..z_nz]; maximize lambda
    c = np.zeros(1 + nz)
    c[0] = -1.0
    A_ub = []
    b_ub = []
    diag = a.diagonal()
    for j in range(1, a.dim + 1):
        row = np.zeros(1 + nz)
        row[0] = 1.0
        for t, (idx, _) in enumerate(offdiag):
            tp = tight_pair(idx)
            for k, jj in enumerate(tp.distinct, start=1):
                if jj == j:
                    row[1 + t] += slice_count(idx, k)
        A_ub.append(row)
        b_ub.append(float(diag[j - 1]))
    bounds = [(None, None)] + [(abs(val), None) for _, val in offdiag]
    res = linprog(c, A_ub=np.array(A_ub), b_ub=np.array(b_ub), bounds=bounds, method="highs")
    if not res.success:
        raise RuntimeError(f"LP cross-check failed: {res.message}")
    return float(res.x[0])


def lower_bound_gddth(a: SymmetricTensor, config: SolverConfig | None = None) -> float:
    """max{lambda : subtracting lambda*I keeps the tensor in the H+ cone}.

    Same conic program as the M-tensor minimum H-eigenvalue but without any
    sign restriction on the off-diagonal entries.
    """
    if a.order % 2 != 0:
        raise ValueError("even order required for a nonnegativity bound")
    tstar, _, _ = gdd_slack_program(a, config or SolverConfig())
    return tstar


def sampled_upper_bound(
    a: SymmetricTensor,
    samples: int = 20000,
    seed: int = 0,
    refine_steps: int = 50,
    refine_top: int = 8,
) -> float:
    """Upper bound on the minimum of A x^m / sum(x_i^m) by sampling plus
    coordinate-descent refinement.  Requires even order."""
    if a.order % 2 != 0:
        raise ValueError("even order required")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    m, n = a.order, a.dim
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((samples, n))
    X = np.vstack([X, np.eye(n), -np.eye(n)])
    norms = np.linalg.norm(X, axis=1)
    X = X / norms[:, None]
    denom = np.sum(X**m, axis=1)
    vals = a.evaluate_many(X) / denom

    def rayleigh(x):
        d = float(np.sum(x**m))
        return a.evaluate(x) / d

    order = np.argsort(vals)
    best_val = float(vals[order[0]])
    for start in order[: max(1, refine_top)]:
        x = X[start].copy()
        val = float(vals[start])
        step = 0.25
        for _ in range(refine_steps):
            improved = False
            for i in range(n):
                for delta in (step, -step):
                    y = x.copy()
                    y[i] += delta
                    if np.all(y == 0.0):
                        continue
                    v = rayleigh(y)
                    if v < val - 1e-15:
                        x, val = y, v
                        improved = True
            if not improved:
                step *= 0.7
                if step < 1e-8:
                    break
        best_val = min(best_val, val)
    return best_val


# -- fourth-degree weighted-square decompositions -----------------------------


class SquareDecomposition:
    """Weighted sum of squared quadratic forms equal to a quartic basis form.

    ``squares`` is a tuple of (weight, coefficient map of a quadratic form);
    the invariant is that sum of weight * form**2 expands to ``target``
    exactly (rational/radical arithmetic for exact mode, 1e-10 relative in
    float mode).
    """

    def __init__(self, target: HomogeneousPolynomial, squares, target_coeffs, exact: bool):
        self.target = target
        self.squares = tuple(squares)
        self._target_coeffs = dict(target_coeffs)
        self.exact = exact

    def expand(self) -> dict:
        out: dict[tuple[int, ...], object] = {}
        for weight, form in self.squares:
            items = list(form.items())
            for e1, c1 in items:
                for e2, c2 in items:
                    key = tuple(a + b for a, b in zip(e1, e2))
                    term = weight * c1 * c2
                    out[key] = out.get(key, 0 if self.exact else 0.0) + term
        return out

    def _diff(self) -> dict:
        out = self.expand()
        for key, c in self._target_coeffs.items():
            out[key] = out.get(key, 0 if self.exact else 0.0) - c
        return out

    def residual(self) -> float:
        """Largest coefficient mismatch, relative to the target scale."""
        scale = max((abs(float(c)) for c in self._target_coeffs.values()), default=1.0)
        worst = 0.0
        for c in self._diff().values():
            if self.exact:
                c = sp.simplify(c)
            worst = max(worst, abs(float(c)) / max(1.0, scale))
        return worst

    def exact_match(self) -> bool:
        """True when every expanded coefficient matches the target exactly."""
        if not self.exact:
            return self.residual() <= 1e-10
        for c in self._diff().values():
            if sp.simplify(c) != 0:
                return False
        return True


_CASE_INDEX = {
    1: (1, 2, 3, 4),
    2: (1, 1, 2, 3),
    3: (1, 1, 1, 2),
    4: (1, 1, 2, 2),
}


def _exp(nvars, **powers):
    out = [0] * nvars
    for name, p in powers.items():
        out[int(name[1:]) - 1] = p
    return tuple(out)


def appendix_identity(case: int, sign, beta=None) -> SquareDecomposition:
    """Explicit weighted-square decomposition of a quartic basis form.

    Cases index the four shapes of off-diagonal quartic classes: all four
    indices distinct, three distinct, the x1^3 x2 pattern, and the
    x1^2 x2^2 pattern.  With ``beta=None`` the slice-count (DD) form is
    decomposed with rational weights; otherwise the scaled form with the
    given nonnegative weights is used.  Exact arithmetic is used whenever
    the inputs are exact (ints or Fractions); float inputs select float
    mode, verified to 1e-10 relative.
    """
    if case not in _CASE_INDEX:
        raise ValueError(f"case must be 1..4, got {case}")
    sgn = _sign_value(sign)
    idx = _CASE_INDEX[case]
    nvars = max(idx)
    exact = beta is None or all(isinstance(b, (int, Fraction)) for b in beta)
    ops = _ExactOps if exact else _FloatOps
    tp = tight_pair(idx)
    if beta is not None:
        if len(beta) != tp.length:
            raise ValueError(f"beta needs {tp.length} entries for case {case}")
        if any(b < 0 for b in beta):
            raise ValueError("beta weights must be nonnegative")

    target_coeffs = _basis_coeffs(idx, sgn, beta, nvars, ops)
    target_float = HomogeneousPolynomial(
        4, nvars, {e: float(c) for e, c in _basis_coeffs(idx, sgn, beta, nvars, _FloatOps).items()}
    )

    one = ops.of(1)
    two = ops.of(2)
    E = lambda **kw: _exp(nvars, **kw)

    if beta is None:
        # slice-count forms with the weights pulled out as rationals
        if case == 1:
            squares = [
                (ops.of(6), {E(x1=2): one, E(x2=2): -one}),
                (ops.of(6), {E(x3=2): one, E(x4=2): -one}),
                (ops.of(12), {E(x1=1, x2=1): one, E(x3=1, x4=1): ops.of(sgn)}),
            ]
        elif case == 2:
            squares = [
                (ops.of(3), {E(x1=2): one, E(x2=2): -one}),
                (ops.of(3), {E(x1=2): one, E(x3=2): -one}),
                (ops.of(6), {E(x1=1, x2=1): one, E(x1=1, x3=1): ops.of(sgn)}),
            ]
        elif case == 3:
            squares = [
                (one, {E(x1=2): one, E(x2=2): -one}),
                (two, {E(x1=2): one, E(x1=1, x2=1): ops.of(sgn)}),
            ]
        else:
            squares = [(ops.of(3), {E(x1=2): one, E(x2=2): ops.of(sgn)})]
    else:
        bv = [ops.of(b) for b in beta]
        if case == 1:
            b1, b2, b3, b4 = bv
            squares = [
                (one, {E(x1=2): ops.sqrt(b1), E(x2=2): -ops.sqrt(b2)}),
                (one, {E(x3=2): ops.sqrt(b3), E(x4=2): -ops.sqrt(b4)}),
                (
                    two,
                    {
                        E(x1=1, x2=1): ops.root(b1 * b2, 4),
                        E(x3=1, x4=1): ops.of(sgn) * ops.root(b3 * b4, 4),
                    },
                ),
            ]
        elif case == 2:
            b1, b2, b3 = bv
            squares = [
                (one, {E(x1=2): ops.sqrt(b1 / two), E(x2=2): -ops.sqrt(b2)}),
                (one, {E(x1=2): ops.sqrt(b1 / two), E(x3=2): -ops.sqrt(b3)}),
                (
                    two,
                    {
                        E(x1=1, x2=1): ops.root(b1 * b2 / two, 4),
                        E(x1=1, x3=1): ops.of(sgn) * ops.root(b1 * b3 / two, 4),
                    },
                ),
            ]
        elif case == 3:
            b1, b2 = bv
            three = ops.of(3)
            squares = [
                (one, {E(x1=2): ops.sqrt(b1 / three), E(x2=2): -ops.sqrt(b2)}),
                (
                    two,
                    {
                        E(x1=2): ops.sqrt(b1 / three),
                        E(x1=1, x2=1): ops.of(sgn) * ops.root(b1 * b2 / three, 4),
                    },
                ),
            ]
        else:
            b1, b2 = bv
            squares = [
                (one, {E(x1=2): ops.sqrt(b1), E(x2=2): ops.of(sgn) * ops.sqrt(b2)})
            ]

    return SquareDecomposition(target_float, squares, target_coeffs, exact)


# -- JSON ---------------------------------------------------------------------


def poly_to_json_dict(p: HomogeneousPolynomial) -> dict:
    return {
        "degree": p.degree,
        "nvars": p.nvars,
        "terms": [{"exp": list(e), "coef": c} for e, c in sorted(p.coeffs.items())],
    }


def poly_from_json_dict(data: dict) -> HomogeneousPolynomial:
    try:
        degree = int(data["degree"])
        nvars = int(data["nvars"])
        terms = {
            tuple(item["exp"]): float(item["coef"]) for item in data.get("terms", [])
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed polynomial JSON: {exc}") from exc
    return HomogeneousPolynomial(degree, nvars, terms)
