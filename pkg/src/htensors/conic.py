"""Conic programs over nonnegative rays and 3-dimensional power cones.

Problems are stated in a standard primal form

    maximize  q . u
    s.t.      E u = f
              u_B in K_B   for each cone block B (disjoint variable slots),
              all remaining variables free.

``solve`` reduces the problem (constant pins, variable aliases, and slack
rows are folded away) and runs a homogeneous self-dual embedding of the
reduced model.  The central path is followed with a nonsymmetric
predictor-corrector method: each power cone contributes the standard
3-parameter logarithmic barrier, the embedding detects infeasibility and
unboundedness through Farkas-type rays, and every Newton system is solved
by direct factorization with an iterative-refinement pass.

An alternative route rewrites every power cone with rational exponent into
a tower of alpha = 1/2 cones (``half_cone_tower`` in ``SolverConfig``); the
direct barrier route is the default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .cones import NonnegCone, PowerCone3

__all__ = [
    "SolverConfig",
    "ConeBlock",
    "ConicProblem",
    "Residuals",
    "SolveResult",
    "SolutionReport",
    "check_solution",
    "solve",
    "rewrite_half_cones",
    "OPTIMAL",
    "INFEASIBLE",
    "UNBOUNDED",
    "ILL_CONDITIONED",
]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ILL_CONDITIONED = "ill_conditioned"


@dataclass(frozen=True)
class SolverConfig:
    feas_tol: float = 1e-8
    gap_tol: float = 1e-8
    max_iter: int = 200
    frac_to_boundary: float = 0.99
    tau_kappa_infeasible: float = 1e-10
    correctors: int = 6
    center_prox: float = 0.15
    predictor_prox: float = 1.5
    dense_limit: int = 200
    longdouble_limit: int = 160
    half_cone_tower: bool = False


@dataclass(frozen=True)
class ConeBlock:
    kind: str  # "nonneg" | "power"
    alpha: float | None
    slots: tuple[int, ...]

    def cone(self):
        if self.kind == "nonneg":
            return NonnegCone(len(self.slots))
        return PowerCone3(self.alpha)


class ConicProblem:
    """Standard-form conic problem built incrementally.

    Variables are created through ``add_free``, ``add_nonneg`` and
    ``add_power``; each cone block owns its freshly created slots, so slot
    sets are disjoint by construction.  Equality rows may reference any
    variable.  The objective is maximized.  Treat instances as immutable
    once handed to ``solve``.
    """

    def __init__(self):
        self.num_vars = 0
        self.objective: dict[int, float] = {}
        self.eq_rows: list[tuple[dict[int, float], float]] = []
        self.cone_blocks: list[ConeBlock] = []
        self.var_names: list[str] = []
        self.meta: dict = {}

    # -- construction -------------------------------------------------------

    def _new_var(self, name: str | None) -> int:
        idx = self.num_vars
        self.num_vars += 1
        self.var_names.append(name if name is not None else f"v{idx}")
        return idx

    def add_free(self, name: str | None = None) -> int:
        return self._new_var(name)

    def add_nonneg(self, size: int, name: str | None = None) -> list[int]:
        base = name if name is not None else "nn"
        slots = [self._new_var(f"{base}[{k}]") for k in range(size)]
        self.cone_blocks.append(ConeBlock("nonneg", None, tuple(slots)))
        return slots

    def add_power(self, alpha: float, name: str | None = None) -> tuple[int, int, int]:
        base = name if name is not None else f"pow{len(self.cone_blocks)}"
        slots = (
            self._new_var(f"{base}.x1"),
            self._new_var(f"{base}.x2"),
            self._new_var(f"{base}.z"),
        )
        PowerCone3(alpha)  # validates alpha
        self.cone_blocks.append(ConeBlock("power", float(alpha), slots))
        return slots

    def add_eq(self, coeffs: dict[int, float], rhs: float) -> None:
        row = {int(k): float(v) for k, v in coeffs.items() if float(v) != 0.0}
        for k in row:
            if not 0 <= k < self.num_vars:
                raise ValueError(f"equality references unknown variable {k}")
        self.eq_rows.append((row, float(rhs)))

    def set_objective(self, coeffs: dict[int, float]) -> None:
        for k in coeffs:
            if not 0 <= int(k) < self.num_vars:
                raise ValueError(f"objective references unknown variable {k}")
        self.objective = {int(k): float(v) for k, v in coeffs.items() if float(v) != 0.0}

    @staticmethod
    def from_parts(num_vars, objective, eq_rows, cone_blocks) -> "ConicProblem":
        """Assemble from raw parts, validating cone-slot disjointness."""
        p = ConicProblem()
        p.num_vars = int(num_vars)
        p.var_names = [f"v{i}" for i in range(p.num_vars)]
        seen: set[int] = set()
        for blk in cone_blocks:
            blk = ConeBlock(blk.kind, blk.alpha, tuple(blk.slots))
            if blk.kind not in ("nonneg", "power"):
                raise ValueError(f"unknown cone kind {blk.kind!r}")
            if blk.kind == "power" and len(blk.slots) != 3:
                raise ValueError("power blocks take exactly 3 slots")
            for s in blk.slots:
                if not 0 <= s < p.num_vars:
                    raise ValueError(f"slot {s} out of range")
                if s in seen:
                    raise ValueError(f"variable {s} belongs to more than one cone block")
                seen.add(s)
            p.cone_blocks.append(blk)
        for coeffs, rhs in eq_rows:
            p.add_eq(coeffs, rhs)
        p.set_objective(dict(objective))
        return p

    # -- debugging ------------------------------------------------------------

    def dump(self) -> str:
        """Plain-text dump: one line per equality row, one per cone block."""
        lines = [f"vars {self.num_vars}"]
        obj = " + ".join(
            f"{v}*{self.var_names[k]}" for k, v in sorted(self.objective.items())
        )
        lines.append(f"maximize {obj or '0'}")
        for coeffs, rhs in self.eq_rows:
            lhs = " + ".join(f"{v}*{self.var_names[k]}" for k, v in sorted(coeffs.items()))
            lines.append(f"eq: {lhs} = {rhs}")
        for blk in self.cone_blocks:
            names = ",".join(self.var_names[s] for s in blk.slots)
            if blk.kind == "nonneg":
                lines.append(f"cone nonneg({len(blk.slots)}): {names}")
            else:
                lines.append(f"cone power(alpha={blk.alpha}): {names}")
        return "\n".join(lines)


@dataclass(frozen=True)
class Residuals:
    primal: float
    dual: float
    gap: float


@dataclass
class SolveResult:
    status: str
    x: np.ndarray | None
    obj: float | None
    residuals: Residuals | None
    iterations: int
    trace: tuple = ()
    message: str = ""
    certificate: dict | None = None


@dataclass(frozen=True)
class SolutionReport:
    """Independent feasibility report for a candidate point."""

    eq_violation: float
    block_margins: tuple[float, ...]

    @property
    def worst_violation(self) -> float:
        cone = max((max(0.0, -m) for m in self.block_margins), default=0.0)
        return max(self.eq_violation, cone)

    def ok(self, tol: float) -> bool:
        return self.worst_violation <= tol


def check_solution(problem: ConicProblem, x, tol: float = 0.0) -> SolutionReport:
    """Equality violations and per-cone membership margins at ``x``.

    Uses only the problem data; independent of any solve path.  ``tol`` is
    accepted for interface symmetry and is applied by ``SolutionReport.ok``.
    """
    del tol
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.num_vars,):
        raise ValueError(f"x has shape {x.shape}, expected ({problem.num_vars},)")
    eq_viol = 0.0
    for coeffs, rhs in problem.eq_rows:
        val = sum(c * x[k] for k, c in coeffs.items()) - rhs
        eq_viol = max(eq_viol, abs(val))
    margins = []
    for blk in problem.cone_blocks:
        vals = x[list(blk.slots)]
        if blk.kind == "nonneg":
            margins.append(float(np.min(vals)))
        else:
            margins.append(float(PowerCone3(blk.alpha).margin(*vals)))
    return SolutionReport(eq_violation=float(eq_viol), block_margins=tuple(margins))


# ---------------------------------------------------------------------------
# Presolve: collapse pins, aliases and slack rows into a reduced model
#
#     minimize  c . v   s.t.  A v = b,   s = h - G v in K.
# ---------------------------------------------------------------------------


@dataclass
class _Reduced:
    c: np.ndarray
    A: np.ndarray  # dense (p, nvar); p is tiny after reduction
    b: np.ndarray
    G: scipy.sparse.csr_matrix  # (q, nvar)
    h: np.ndarray
    blocks: list  # [(cone object, row slice), ...]
    nvar: int
    obj_const: float
    # per original variable: ("const", val) | ("var", col) |
    # ("affine", const, [(col, coef), ...])
    recover: list
    infeasible_note: str | None = None


def _infeasible_marker(note: str, obj_const: float = 0.0) -> _Reduced:
    return _Reduced(
        c=np.zeros(0), A=np.zeros((0, 0)), b=np.zeros(0),
        G=scipy.sparse.csr_matrix((0, 0)), h=np.zeros(0), blocks=[],
        nvar=0, obj_const=obj_const, recover=[], infeasible_note=note,
    )


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if rb < ra:  # smallest index wins, keeps the reduction deterministic
            ra, rb = rb, ra
        self.parent[rb] = ra
        return ra


def _presolve(problem: ConicProblem) -> _Reduced:
    n = problem.num_vars
    uf = _UnionFind(n)
    fixed: dict[int, float] = {}
    note: str | None = None

    rows = [dict(coeffs) for coeffs, _ in problem.eq_rows]
    rhss = [rhs for _, rhs in problem.eq_rows]
    alive = [True] * len(rows)

    def fix(root: int, val: float) -> bool:
        if root in fixed:
            return abs(fixed[root] - val) <= 1e-9 * (1 + abs(val))
        fixed[root] = val
        return True

    changed = True
    while changed and note is None:
        changed = False
        for ridx in range(len(rows)):
            if not alive[ridx] or note is not None:
                continue
            acc: dict[int, float] = {}
            r = rhss[ridx]
            for v, cf in rows[ridx].items():
                rv = uf.find(v)
                if rv in fixed:
                    r -= cf * fixed[rv]
                else:
                    acc[rv] = acc.get(rv, 0.0) + cf
            acc = {v: cf for v, cf in acc.items() if cf != 0.0}
            if acc != rows[ridx] or r != rhss[ridx]:
                rows[ridx], rhss[ridx] = acc, r
                changed = True
            if not acc:
                if abs(r) > 1e-9 * (1 + abs(problem.eq_rows[ridx][1])):
                    note = f"equality row {ridx} reduces to 0 = {r}"
                alive[ridx] = False
                changed = True
            elif len(acc) == 1:
                ((v, cf),) = acc.items()
                if not fix(v, r / cf):
                    note = f"variable {v} pinned to conflicting values"
                alive[ridx] = False
                changed = True
            elif len(acc) == 2 and r == 0.0:
                (v1, c1), (v2, c2) = sorted(acc.items())
                if c1 == -c2:
                    uf.union(v1, v2)
                    root = uf.find(v1)
                    for w in (v1, v2):
                        if w in fixed and w != root:
                            val = fixed.pop(w)
                            if not fix(root, val):
                                note = "alias merged conflicting pins"
                    alive[ridx] = False
                    changed = True

    if note is not None:
        return _infeasible_marker(note)

    # cone slots per surviving root
    slot_of: dict[int, list[tuple[int, int]]] = {}
    for bi, blk in enumerate(problem.cone_blocks):
        for pos, s in enumerate(blk.slots):
            slot_of.setdefault(uf.find(s), []).append((bi, pos))

    obj_const = 0.0
    obj_map: dict[int, float] = {}
    for v, cf in problem.objective.items():
        rv = uf.find(v)
        if rv in fixed:
            obj_const += cf * fixed[rv]
        else:
            obj_map[rv] = obj_map.get(rv, 0.0) + cf
    obj_roots = set(obj_map)

    # slack elimination: fold a row into the cone row of a variable that
    # appears in exactly this row and exactly one cone slot
    occ: dict[int, list[int]] = {}
    live_rows = [i for i in range(len(rows)) if alive[i]]
    for ridx in live_rows:
        for v in rows[ridx]:
            occ.setdefault(v, []).append(ridx)
    slack_expr: dict[int, tuple[float, list[tuple[int, float]]]] = {}
    pinned: set[int] = set()
    for ridx in live_rows:
        cands = [
            v
            for v in rows[ridx]
            if len(occ.get(v, ())) == 1
            and len(slot_of.get(v, ())) == 1
            and v not in obj_roots
            and v not in pinned
            and v not in slack_expr
            and v not in fixed
        ]
        if not cands:
            continue
        w = max(cands, key=lambda v: (abs(rows[ridx][v]), -v))
        cw = rows[ridx][w]
        terms = [(v, -cf / cw) for v, cf in sorted(rows[ridx].items()) if v != w]
        slack_expr[w] = (rhss[ridx] / cw, terms)
        pinned.update(v for v, _ in terms)
        alive[ridx] = False

    # surviving variables
    referenced: set[int] = set()
    for ridx in range(len(rows)):
        if alive[ridx]:
            referenced.update(rows[ridx])
    referenced.update(obj_roots)
    referenced.update(v for v in slot_of if v not in fixed and v not in slack_expr)
    for _, terms in slack_expr.values():
        referenced.update(v for v, _ in terms)
    survivors = sorted(v for v in referenced if v not in fixed and v not in slack_expr)
    col = {v: i for i, v in enumerate(survivors)}
    nvar = len(survivors)

    c = np.zeros(nvar)
    for v, cf in obj_map.items():
        c[col[v]] -= cf  # maximize q.u  ->  minimize -q.u

    A_rows = []
    b_vals = []
    for ridx in range(len(rows)):
        if not alive[ridx]:
            continue
        arow = np.zeros(nvar)
        for v, cf in rows[ridx].items():
            arow[col[v]] = cf
        A_rows.append(arow)
        b_vals.append(rhss[ridx])
    A = np.array(A_rows) if A_rows else np.zeros((0, nvar))
    b = np.array(b_vals)

    if A.shape[0] > 0:
        # dependent equality rows are dropped after a consistency check
        x0 = np.linalg.lstsq(A, b, rcond=None)[0]
        rank = np.linalg.matrix_rank(A)
        if rank < A.shape[0]:
            if np.max(np.abs(A @ x0 - b)) > 1e-8 * (1 + np.max(np.abs(b))):
                return _infeasible_marker("inconsistent dependent equality rows", obj_const)
            _, _, piv = scipy.linalg.qr(A.T, pivoting=True, mode="economic")
            keep = sorted(piv[:rank])
            A = A[keep]
            b = b[keep]

    g_rows: list[int] = []
    g_cols: list[int] = []
    g_vals: list[float] = []
    h_vals: list[float] = []
    blocks = []
    qrow = 0
    for blk in problem.cone_blocks:
        start = qrow
        for s in blk.slots:
            rv = uf.find(s)
            if rv in fixed:
                h_vals.append(fixed[rv])
            elif rv in slack_expr:
                const, terms = slack_expr[rv]
                h_vals.append(const)
                for v, cf in terms:
                    # slot value = const + sum cf*v, and s = h - G v
                    g_rows.append(qrow)
                    g_cols.append(col[v])
                    g_vals.append(-cf)
            else:
                h_vals.append(0.0)
                g_rows.append(qrow)
                g_cols.append(col[rv])
                g_vals.append(-1.0)
            qrow += 1
        blocks.append((blk.cone(), slice(start, qrow)))
    G = scipy.sparse.csr_matrix((g_vals, (g_rows, g_cols)), shape=(qrow, nvar))
    h = np.array(h_vals)

    recover: list[tuple] = []
    for v in range(n):
        rv = uf.find(v)
        if rv in fixed:
            recover.append(("const", fixed[rv]))
        elif rv in slack_expr:
            const, terms = slack_expr[rv]
            recover.append(("affine", const, [(col[w], cf) for w, cf in terms]))
        elif rv in col:
            recover.append(("var", col[rv]))
        else:
            recover.append(("const", 0.0))  # never referenced anywhere

    return _Reduced(
        c=c, A=A, b=b, G=G, h=h, blocks=blocks, nvar=nvar,
        obj_const=obj_const, recover=recover,
    )


def _recover_x(red: _Reduced, xbar: np.ndarray, num_vars: int, ray: bool = False) -> np.ndarray:
    """Map a reduced solution (or ray, dropping constants) back to the
    standard-form variable vector."""
    out = np.zeros(num_vars)
    for v, spec in enumerate(red.recover):
        if spec[0] == "const":
            out[v] = 0.0 if ray else spec[1]
        elif spec[0] == "var":
            out[v] = xbar[spec[1]]
        else:
            _, const, terms = spec
            out[v] = (0.0 if ray else const) + sum(cf * xbar[cl] for cl, cf in terms)
    return out


# ---------------------------------------------------------------------------
# Homogeneous self-dual embedding
# ---------------------------------------------------------------------------


def _lu_factor_ld(m: np.ndarray):
    """Plain partial-pivoting LU in extended precision (in-place packed)."""
    a = m.copy()
    n = a.shape[0]
    piv = np.arange(n)
    for k in range(n - 1):
        i = k + int(np.argmax(np.abs(a[k:, k])))
        if a[i, k] == 0:
            raise scipy.linalg.LinAlgError("singular matrix in extended LU")
        if i != k:
            a[[k, i]] = a[[i, k]]
            piv[[k, i]] = piv[[i, k]]
        a[k + 1:, k] /= a[k, k]
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    if a[n - 1, n - 1] == 0:
        raise scipy.linalg.LinAlgError("singular matrix in extended LU")
    return a, piv


def _lu_solve_ld(lu, piv, b):
    x = b[piv].astype(np.longdouble, copy=True)
    n = lu.shape[0]
    for k in range(1, n):
        x[k] -= lu[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - lu[k, k + 1:] @ x[k + 1:]) / lu[k, k]
    return x


def _inv3(h: np.ndarray) -> np.ndarray:
    """Inverse of a 3x3 matrix, dtype preserving (handles longdouble)."""
    if h.dtype == np.longdouble:
        lu, piv = _lu_factor_ld(h)
        eye = np.eye(3, dtype=np.longdouble)
        return np.column_stack([_lu_solve_ld(lu, piv, eye[:, k]) for k in range(3)])
    return np.linalg.inv(h)


class _Barrier:
    """Batched barrier calculus over all cone blocks of a reduced model.

    Nonnegative slots are kept as one index vector; power cones as a
    (k, 3) slot-index array with per-cone exponents.  All per-iteration
    quantities (gradient, Hessian blocks, their Cholesky factors and the
    associated triangular ops) are computed vectorized across blocks.
    """

    def __init__(self, blocks, q: int, dtype):
        nn: list[int] = []
        pw: list[list[int]] = []
        al: list[float] = []
        for cone, rows in blocks:
            if isinstance(cone, NonnegCone):
                nn.extend(range(rows.start, rows.stop))
            else:
                pw.append([rows.start, rows.start + 1, rows.start + 2])
                al.append(cone.alpha)
        self.q = q
        self.dtype = dtype
        self.nn = np.array(nn, dtype=np.intp)
        self.pw = np.array(pw, dtype=np.intp).reshape(-1, 3)
        self.al = np.array(al, dtype=dtype)
        self.k = self.pw.shape[0]
        self.nu = len(nn) + 3 * self.k
        # strictly positive coordinates (all nonneg slots, power x1/x2)
        self.lin_idx = np.concatenate([self.nn, self.pw[:, 0], self.pw[:, 1]])

    def init_point(self) -> np.ndarray:
        s = np.ones(self.q, dtype=self.dtype)
        if self.k:
            s[self.pw[:, 2]] = 0.0
        return s

    def _parts(self, s):
        x1 = s[self.pw[:, 0]]
        x2 = s[self.pw[:, 1]]
        z = s[self.pw[:, 2]]
        a = self.al
        psi = x1 ** (2 * a) * x2 ** (2 - 2 * a)
        phi = psi - z * z
        return x1, x2, z, a, psi, phi

    def interior(self, s) -> bool:
        if self.nn.size and not np.all(s[self.nn] > 0):
            return False
        if self.k:
            x1, x2, z, a, psi, phi = self._parts(s)
            if not (np.all(x1 > 0) and np.all(x2 > 0) and np.all(phi > 0)):
                return False
        return True

    def dual_interior(self, zvec) -> bool:
        if self.nn.size and not np.all(zvec[self.nn] > 0):
            return False
        if self.k:
            u1 = zvec[self.pw[:, 0]]
            u2 = zvec[self.pw[:, 1]]
            w = zvec[self.pw[:, 2]]
            a = self.al
            if not (np.all(u1 > 0) and np.all(u2 > 0)):
                return False
            val = (u1 / a) ** a * (u2 / (1 - a)) ** (1 - a)
            if not np.all(val > np.abs(w)):
                return False
        return True

    def grad(self, s) -> np.ndarray:
        g = np.empty(self.q, dtype=s.dtype)
        if self.nn.size:
            g[self.nn] = -1.0 / s[self.nn]
        if self.k:
            x1, x2, z, a, psi, phi = self._parts(s)
            g[self.pw[:, 0]] = -2 * a * psi / (x1 * phi) - (1 - a) / x1
            g[self.pw[:, 1]] = -2 * (1 - a) * psi / (x2 * phi) - a / x2
            g[self.pw[:, 2]] = 2 * z / phi
        return g

    def state(self, s) -> "_BarrierState":
        return _BarrierState(self, s)


class _BarrierState:
    """Hessian data at a fixed interior point: nonneg weights plus batched
    power-cone Hessian blocks with lower Cholesky factors."""

    __slots__ = ("bar", "w", "sqrt_w", "H", "L", "Hinv")

    def __init__(self, bar: _Barrier, s):
        self.bar = bar
        if bar.nn.size:
            sn = s[bar.nn]
            self.w = 1.0 / (sn * sn)
            self.sqrt_w = 1.0 / sn
        else:
            self.w = self.sqrt_w = np.zeros(0, dtype=s.dtype)
        if bar.k:
            x1, x2, z, a, psi, phi = bar._parts(s)
            g1 = 2 * a * psi / x1
            g2 = 2 * (1 - a) * psi / x2
            g3 = -2 * z
            h11 = 2 * a * (2 * a - 1) * psi / (x1 * x1)
            h12 = 4 * a * (1 - a) * psi / (x1 * x2)
            h22 = 2 * (1 - a) * (1 - 2 * a) * psi / (x2 * x2)
            phi2 = phi * phi
            H = np.empty((bar.k, 3, 3), dtype=s.dtype)
            H[:, 0, 0] = g1 * g1 / phi2 - h11 / phi + (1 - a) / (x1 * x1)
            H[:, 0, 1] = H[:, 1, 0] = g1 * g2 / phi2 - h12 / phi
            H[:, 0, 2] = H[:, 2, 0] = g1 * g3 / phi2
            H[:, 1, 1] = g2 * g2 / phi2 - h22 / phi + a / (x2 * x2)
            H[:, 1, 2] = H[:, 2, 1] = g2 * g3 / phi2
            H[:, 2, 2] = g3 * g3 / phi2 + 2.0 / phi
            self.H = H
            self.L = _chol3_batch(H)
        else:
            self.H = np.zeros((0, 3, 3), dtype=s.dtype)
            self.L = self.H
        self.Hinv = None

    def with_inverse(self) -> "_BarrierState":
        # H^{-1} = L^{-T} L^{-1} from the closed-form triangular inverse
        if self.bar.k and self.Hinv is None:
            L = self.L
            k = self.bar.k
            Li = np.zeros_like(L)
            Li[:, 0, 0] = 1.0 / L[:, 0, 0]
            Li[:, 1, 1] = 1.0 / L[:, 1, 1]
            Li[:, 2, 2] = 1.0 / L[:, 2, 2]
            Li[:, 1, 0] = -L[:, 1, 0] * Li[:, 0, 0] * Li[:, 1, 1]
            Li[:, 2, 1] = -L[:, 2, 1] * Li[:, 1, 1] * Li[:, 2, 2]
            Li[:, 2, 0] = (
                L[:, 1, 0] * L[:, 2, 1] - L[:, 2, 0] * L[:, 1, 1]
            ) * Li[:, 0, 0] * Li[:, 1, 1] * Li[:, 2, 2]
            self.Hinv = np.einsum("kji,kjl->kil", Li, Li)
        elif self.Hinv is None:
            self.Hinv = np.zeros((0, 3, 3), dtype=self.L.dtype)
        return self


def _chol3_batch(H: np.ndarray) -> np.ndarray:
    """Batched lower Cholesky of (k, 3, 3) SPD blocks with jitter retries."""
    k = H.shape[0]
    Hw = H
    for attempt in range(4):
        with np.errstate(invalid="ignore", divide="ignore"):
            l11 = np.sqrt(Hw[:, 0, 0])
            l21 = Hw[:, 1, 0] / l11
            l31 = Hw[:, 2, 0] / l11
            t22 = Hw[:, 1, 1] - l21 * l21
            l22 = np.sqrt(t22)
            l32 = (Hw[:, 2, 1] - l31 * l21) / l22
            t33 = Hw[:, 2, 2] - l31 * l31 - l32 * l32
            l33 = np.sqrt(t33)
        bad = ~(
            np.isfinite(l11) & np.isfinite(l21) & np.isfinite(l31)
            & np.isfinite(l22) & np.isfinite(l32) & np.isfinite(l33)
            & (l11 > 0) & (l22 > 0) & (l33 > 0)
        )
        if not np.any(bad):
            L = np.zeros_like(Hw)
            L[:, 0, 0] = l11
            L[:, 1, 0] = l21
            L[:, 2, 0] = l31
            L[:, 1, 1] = l22
            L[:, 2, 1] = l32
            L[:, 2, 2] = l33
            return L
        if attempt == 3:
            raise scipy.linalg.LinAlgError("barrier Hessian block not factorable")
        jitter = 10.0 ** (-13 + 4 * attempt)
        Hw = Hw.copy()
        trace = (Hw[bad, 0, 0] + Hw[bad, 1, 1] + Hw[bad, 2, 2]) / 3.0
        for i in range(3):
            Hw[bad, i, i] += jitter * trace
    raise scipy.linalg.LinAlgError("unreachable")


class _State:
    __slots__ = ("x", "y", "z", "tau", "s", "kappa")

    def __init__(self, x, y, z, tau, s, kappa):
        self.x, self.y, self.z, self.tau, self.s, self.kappa = x, y, z, tau, s, kappa

    def stepped(self, d, alpha):
        dx, dy, dz, dtau, ds, dkappa = d
        return _State(
            self.x + alpha * dx,
            self.y + alpha * dy,
            self.z + alpha * dz,
            self.tau + alpha * dtau,
            self.s + alpha * ds,
            self.kappa + alpha * dkappa,
        )

    def copy(self):
        return _State(
            self.x.copy(), self.y.copy(), self.z.copy(), self.tau, self.s.copy(), self.kappa
        )


class _Hsde:
    def __init__(self, red: _Reduced, cfg: SolverConfig):
        self.red = red
        self.cfg = cfg
        self.n = red.nvar
        self.p = red.A.shape[0]
        self.q = red.G.shape[0]
        dim = self.n + self.p + self.q
        # small systems run entirely in extended precision, which carries
        # the endgame past the float64 conditioning wall
        self.dtype = np.longdouble if dim <= cfg.longdouble_limit else np.float64
        if self.dtype == np.longdouble:
            self.c = red.c.astype(np.longdouble)
            self.A = red.A.astype(np.longdouble)
            self.b = red.b.astype(np.longdouble)
            self.G = red.G.toarray().astype(np.longdouble)
            self.h = red.h.astype(np.longdouble)
            self.GT = self.G.T
        else:
            self.c, self.A, self.b = red.c, red.A, red.b
            self.G = red.G
            self.GT = red.G.T.tocsr()
            self.h = red.h
            self._Asp = scipy.sparse.csr_matrix(self.A) if self.p else None
            self._Ieye = scipy.sparse.identity(self.q, format="csr")
        self.bar = _Barrier(red.blocks, self.q, self.dtype)
        self.nu = self.bar.nu + 1
        self.scale_b = 1.0 + (float(np.max(np.abs(self.b))) if self.p else 0.0)
        self.scale_h = 1.0 + (float(np.max(np.abs(self.h))) if self.q else 0.0)
        self.scale_c = 1.0 + (float(np.max(np.abs(self.c))) if self.n else 0.0)
        self.lin_idx = self.bar.lin_idx

    # -- barrier plumbing ----------------------------------------------------

    def _blockdata(self, s) -> _BarrierState:
        bs = self.bar.state(s)
        if self.dtype == np.longdouble:
            bs.with_inverse()
        return bs

    def _grad(self, s) -> np.ndarray:
        return self.bar.grad(s)

    def _hmul(self, bd: _BarrierState, v) -> np.ndarray:
        out = np.empty(self.q, dtype=v.dtype)
        bar = self.bar
        if bar.nn.size:
            out[bar.nn] = bd.w * v[bar.nn]
        if bar.k:
            out[bar.pw] = np.einsum("kij,kj->ki", bd.H, v[bar.pw])
        return out

    def _hinv(self, bd: _BarrierState, v) -> np.ndarray:
        out = np.empty(self.q, dtype=v.dtype)
        bar = self.bar
        if bar.nn.size:
            out[bar.nn] = v[bar.nn] / bd.w
        if bar.k:
            out[bar.pw] = np.einsum("kij,kj->ki", bd.Hinv, v[bar.pw])
        return out

    def _lmul(self, bd: _BarrierState, v) -> np.ndarray:
        out = np.empty(self.q, dtype=v.dtype)
        bar = self.bar
        if bar.nn.size:
            out[bar.nn] = bd.sqrt_w * v[bar.nn]
        if bar.k:
            out[bar.pw] = np.einsum("kij,kj->ki", bd.L, v[bar.pw])
        return out

    def _ltmul(self, bd: _BarrierState, v) -> np.ndarray:
        out = np.empty(self.q, dtype=v.dtype)
        bar = self.bar
        if bar.nn.size:
            out[bar.nn] = bd.sqrt_w * v[bar.nn]
        if bar.k:
            out[bar.pw] = np.einsum("kji,kj->ki", bd.L, v[bar.pw])
        return out

    def _lsolve(self, bd: _BarrierState, v) -> np.ndarray:
        """Forward substitution with the block Cholesky factors."""
        out = np.empty(self.q, dtype=v.dtype)
        bar = self.bar
        if bar.nn.size:
            out[bar.nn] = v[bar.nn] / bd.sqrt_w
        if bar.k:
            L = bd.L
            b = v[bar.pw]
            y0 = b[:, 0] / L[:, 0, 0]
            y1 = (b[:, 1] - L[:, 1, 0] * y0) / L[:, 1, 1]
            y2 = (b[:, 2] - L[:, 2, 0] * y0 - L[:, 2, 1] * y1) / L[:, 2, 2]
            out[bar.pw] = np.stack([y0, y1, y2], axis=1)
        return out

    def _interior(self, s) -> bool:
        return self.bar.interior(s)

    def _dual_interior(self, z) -> bool:
        return self.bar.dual_interior(z)

    def _mu(self, st: _State) -> float:
        return (float(st.z @ st.s) + st.tau * st.kappa) / self.nu

    def _prox(self, st: _State, mu: float) -> float:
        if mu <= 0 or st.tau <= 0:
            return math.inf
        try:
            bd = self._blockdata(st.s)
            psi = st.z + mu * self._grad(st.s)
            y = self._lsolve(bd, psi)
            total = float(y @ y)
        except (scipy.linalg.LinAlgError, FloatingPointError, ValueError):
            return math.inf
        total += float((st.tau * (st.kappa - mu / st.tau)) ** 2)
        if not math.isfinite(total) or total < 0:
            return math.inf
        return math.sqrt(total) / mu

    # -- Newton system ---------------------------------------------------------

    def _factor(self, bd, mu):
        """Factor the Newton saddle system for the current barrier state.

        The reduced 3-block system

            A' dy + G' dz = rho1,   A dx = rho2,   G dx - (Hinv/mu) dz = rho3

        is solved through the change of variables z = sqrt(mu) L w with
        H = L L', which turns the z-block into the identity:

            [[0, A', B], [A, 0, 0], [B', 0, -I]],   B = sqrt(mu) G' L.

        This scaling keeps the factorization well conditioned along the
        whole central path; small systems additionally run in extended
        precision."""
        if self.dtype == np.longdouble:
            return self._factor_ld(bd, mu)
        sqrtmu = math.sqrt(mu)
        # sparse block-diagonal Cholesky factor of the barrier Hessian
        bar = self.bar
        tri_r, tri_c = np.tril_indices(3)
        lr = np.concatenate([bar.nn, (bar.pw[:, :, None][:, tri_r, 0]).ravel()])
        lc = np.concatenate([bar.nn, (bar.pw[:, :, None][:, tri_c, 0]).ravel()])
        lv = np.concatenate([bd.sqrt_w, bd.L[:, tri_r, tri_c].ravel()])
        Lsp = scipy.sparse.csr_matrix((lv, (lr, lc)), shape=(self.q, self.q))
        B = (self.GT @ Lsp) * sqrtmu
        if self.p:
            blocks = [
                [None, self._Asp.T, B],
                [self._Asp, None, None],
                [B.T, None, -self._Ieye],
            ]
        else:
            blocks = [[None, B], [B.T, -self._Ieye]]
        Mt = scipy.sparse.bmat(blocks, format="csc")
        dim = self.n + self.p + self.q
        if dim <= self.cfg.dense_limit:
            lu = scipy.linalg.lu_factor(Mt.toarray(), check_finite=False)
            if not np.all(np.isfinite(lu[0])):
                raise scipy.linalg.LinAlgError("non-finite factor")
            return ("L-dense", lu, Mt.tocsr(), sqrtmu)
        return ("L-sparse", scipy.sparse.linalg.splu(Mt), Mt.tocsr(), sqrtmu)

    def _factor_ld(self, bd, mu):
        n, p, q = self.n, self.p, self.q
        dim = n + p + q
        M = np.zeros((dim, dim), dtype=np.longdouble)
        if p:
            M[n : n + p, :n] = self.A
            M[:n, n : n + p] = self.A.T
        off = n + p
        M[off:, :n] = self.G
        M[:n, off:] = self.GT
        bar = self.bar
        if bar.nn.size:
            M[off + bar.nn, off + bar.nn] -= 1.0 / (bd.w * mu)
        for kk in range(bar.k):
            rr = off + bar.pw[kk]
            M[np.ix_(rr, rr)] -= bd.Hinv[kk] / mu
        dscale = np.ones(dim, dtype=np.longdouble)
        absM = np.abs(M)
        for _ in range(3):
            rowmax = np.max(absM * dscale[:, None] * dscale[None, :], axis=1)
            rowmax[rowmax <= 0] = 1.0
            dscale /= np.sqrt(rowmax)
        Ms = M * dscale[:, None] * dscale[None, :]
        lu, piv = _lu_factor_ld(Ms)
        return ("ld", (lu, piv), M, dscale)

    def _solve_aug_ld(self, fact, rhs):
        _, (lu, piv), M, dscale = fact
        sol = dscale * _lu_solve_ld(lu, piv, dscale * rhs)
        scale = 1.0 + float(np.max(np.abs(rhs)))
        best, best_res = sol, math.inf
        for _ in range(3):
            resid = rhs - M @ best
            worst = float(np.max(np.abs(resid)))
            if worst >= best_res or worst <= 1e-16 * scale:
                break
            best_res = worst
            best = best + dscale * _lu_solve_ld(lu, piv, dscale * resid)
        return best

    def _solve_transformed(self, fact, rhs):
        mode, lu, Mt, _ = fact
        if mode == "L-dense":
            sol = scipy.linalg.lu_solve(lu, rhs, check_finite=False)
        else:
            sol = lu.solve(rhs)
        # one refinement round against the transformed operator
        resid = rhs - Mt @ sol
        if float(np.max(np.abs(resid))) > 1e-13 * (1.0 + float(np.max(np.abs(rhs)))):
            if mode == "L-dense":
                sol = sol + scipy.linalg.lu_solve(lu, resid, check_finite=False)
            else:
                sol = sol + lu.solve(resid)
        return sol

    def _solve_xyz(self, fact, bd, mu, rho1, rho2, rho3_lin, rho3_bar):
        """Solve the reduced 3-block system with right-hand side

            rho3 = rho3_lin + Hinv(rho3_bar) / mu

        on the z-row, avoiding any explicit inverse-Hessian product in the
        float64 path (triangular solves only)."""
        if fact[0] == "ld":
            rho3 = rho3_lin + self._hinv(bd, rho3_bar) / mu
            rhs = np.concatenate([rho1, rho2, rho3])
            sol = self._solve_aug_ld(fact, rhs)
            dx = sol[: self.n]
            dy = sol[self.n : self.n + self.p]
            dz = sol[self.n + self.p :]
            return dx, dy, dz
        sqrtmu = fact[3]
        rhs3 = sqrtmu * self._ltmul(bd, rho3_lin) + self._lsolve(bd, rho3_bar) / sqrtmu
        rhs = np.concatenate([rho1, rho2, rhs3])
        sol = self._solve_transformed(fact, rhs)
        dx = sol[: self.n]
        dy = sol[self.n : self.n + self.p]
        w = sol[self.n + self.p :]
        dz = sqrtmu * self._lmul(bd, w)
        return dx, dy, dz

    def _newton_raw(self, st: _State, bd, fact, mu, rs):
        r1, r2, r3, r4, r5, r6 = rs
        r4p = r4 + r6
        zero_q = np.zeros(self.q, dtype=r3.dtype)
        xr, yr, zr = self._solve_xyz(fact, bd, mu, r1, -r2, -r3, -r5)
        xg, yg, zg = self._solve_xyz(fact, bd, mu, -self.c, self.b, self.h, zero_q)
        lin_r = float(self.c @ xr + (self.b @ yr if self.p else 0.0) + self.h @ zr)
        lin_g = float(self.c @ xg + (self.b @ yg if self.p else 0.0) + self.h @ zg)
        denom = mu / st.tau**2 - lin_g
        if denom == 0.0 or not math.isfinite(denom):
            raise scipy.linalg.LinAlgError("singular tau pivot")
        dtau = (r4p + lin_r) / denom
        dx = xr + dtau * xg
        dy = yr + dtau * yg
        dz = zr + dtau * zg
        # ds from the linear cone equation keeps it exact by construction;
        # the solve error then shows up on the well-scaled barrier equation
        ds = -(self.G @ dx) + self.h * dtau - r3
        dkappa = r6 - (mu / st.tau**2) * dtau
        return (dx, dy, dz, dtau, ds, dkappa)

    def _direction_residuals(self, st: _State, bd, mu, d, rs):
        dx, dy, dz, dtau, ds, dkappa = d
        r1, r2, r3, r4, r5, r6 = rs
        e1 = (self.A.T @ dy if self.p else np.zeros(self.n)) + self.GT @ dz + self.c * dtau - r1
        e2 = (-(self.A @ dx) + self.b * dtau - r2) if self.p else np.zeros(0)
        e3 = -(self.G @ dx) + self.h * dtau - ds - r3
        e4 = -float(self.c @ dx) - (float(self.b @ dy) if self.p else 0.0) - float(self.h @ dz) - dkappa - r4
        e5 = dz + mu * self._hmul(bd, ds) - r5
        e6 = dkappa + (mu / st.tau**2) * dtau - r6
        return (e1, e2, e3, e4, e5, e6)

    def _newton(self, st: _State, bd, fact, mu, rs):
        d = self._newton_raw(st, bd, fact, mu, rs)
        scale_lin = 1.0 + max(
            float(np.max(np.abs(rs[0]))) if self.n else 0.0,
            float(np.max(np.abs(rs[2]))) if self.q else 0.0,
            abs(float(rs[3])),
        )
        scale_bar = 1.0 + (float(np.max(np.abs(rs[4]))) if self.q else 0.0)

        def split_worst(res):
            lin = max(
                float(np.max(np.abs(res[0]))) if self.n else 0.0,
                float(np.max(np.abs(res[1]))) if self.p else 0.0,
                float(np.max(np.abs(res[2]))) if self.q else 0.0,
                abs(float(res[3])),
                abs(float(res[5])),
            )
            bar = float(np.max(np.abs(res[4]))) if self.q else 0.0
            return lin, bar

        worst_lin = worst_bar = math.inf
        for _ in range(5):
            res = self._direction_residuals(st, bd, mu, d, rs)
            lin, bar = split_worst(res)
            if (lin >= worst_lin and bar >= worst_bar) or (
                lin <= 1e-12 * scale_lin and bar <= 1e-11 * scale_bar
            ):
                worst_lin, worst_bar = min(worst_lin, lin), min(worst_bar, bar)
                break
            worst_lin, worst_bar = lin, bar
            corr = self._newton_raw(st, bd, fact, mu, res)
            d = tuple(a - b for a, b in zip(d, corr))
        # the linear equations control feasibility decrease and must be tight;
        # barrier-equation error only perturbs centering and is gated by the
        # proximity checks in the line search
        if worst_lin > 1e-8 * scale_lin or worst_bar > 1e-2 * scale_bar:
            raise scipy.linalg.LinAlgError(
                f"unreliable Newton direction (linear {worst_lin:.2e}, "
                f"barrier {worst_bar:.2e})"
            )
        return d

    # -- line searches -----------------------------------------------------------

    def _alpha_linear(self, st: _State, d) -> float:
        dx, dy, dz, dtau, ds, dkappa = d
        alpha = math.inf
        for val, dval in ((st.tau, dtau), (st.kappa, dkappa)):
            if dval < 0:
                alpha = min(alpha, -val / dval)
        if self.lin_idx.size:
            for vec, dvec in ((st.s, ds), (st.z, dz)):
                v = vec[self.lin_idx]
                w = dvec[self.lin_idx]
                neg = w < 0
                if np.any(neg):
                    alpha = min(alpha, float(np.min(-v[neg] / w[neg])))
        return alpha

    def _interior_at(self, st: _State) -> bool:
        return (
            st.tau > 0.0
            and st.kappa > 0.0
            and self._interior(st.s)
            and self._dual_interior(st.z)
        )

    def _search_predictor(self, st: _State, d) -> tuple[float, _State]:
        alpha = min(1.0, self.cfg.frac_to_boundary * self._alpha_linear(st, d))
        while alpha > 1e-10:
            cand = st.stepped(d, alpha)
            if self._interior_at(cand):
                mu_new = self._mu(cand)
                if mu_new > 0 and self._prox(cand, mu_new) <= self.cfg.predictor_prox:
                    return alpha, cand
            alpha *= 0.8
        return 0.0, st

    def _search_corrector(self, st: _State, d, prox_cur: float) -> tuple[float, _State]:
        alpha = min(1.0, self.cfg.frac_to_boundary * self._alpha_linear(st, d))
        while alpha > 1e-8:
            cand = st.stepped(d, alpha)
            if self._interior_at(cand):
                p_new = self._prox(cand, self._mu(cand))
                if p_new <= max(self.cfg.center_prox, 0.9 * prox_cur):
                    return alpha, cand
            alpha *= 0.6
        return 0.0, st

    # -- main loop ------------------------------------------------------------------

    def run(self) -> dict:
        cfg = self.cfg
        s0 = self.bar.init_point()
        st = _State(
            x=np.zeros(self.n, dtype=self.dtype),
            y=np.zeros(self.p, dtype=self.dtype),
            z=-self._grad(s0),
            tau=self.dtype(1.0), s=s0, kappa=self.dtype(1.0),
        )
        mu0 = self._mu(st)
        trace: list[tuple] = []
        best = None
        best_metric = math.inf
        status = ILL_CONDITIONED
        message = "iteration cap reached"
        certificate = None
        stalls = 0
        iterations = 0

        for it in range(cfg.max_iter):
            iterations = it
            res_x = (self.A.T @ st.y if self.p else np.zeros(self.n)) + self.GT @ st.z + self.c * st.tau
            res_y = -(self.A @ st.x) + self.b * st.tau if self.p else np.zeros(0)
            res_z = -(self.G @ st.x) + self.h * st.tau - st.s
            res_t = (
                -float(self.c @ st.x)
                - (float(self.b @ st.y) if self.p else 0.0)
                - float(self.h @ st.z)
                - st.kappa
            )
            mu = self._mu(st)

            xs = st.x / st.tau
            zs = st.z / st.tau
            ss = st.s / st.tau
            ys = st.y / st.tau if self.p else st.y
            pobj = float(self.c @ xs)
            dobj = -(float(self.b @ ys) if self.p else 0.0) - float(self.h @ zs)
            pres_eq = float(np.max(np.abs(self.A @ xs - self.b))) / self.scale_b if self.p else 0.0
            pres_cone = float(np.max(np.abs(self.G @ xs + ss - self.h))) / self.scale_h
            pres = max(pres_eq, pres_cone)
            dres = (
                float(
                    np.max(
                        np.abs(
                            (self.A.T @ ys if self.p else np.zeros(self.n))
                            + self.GT @ zs
                            + self.c
                        )
                    )
                )
                / self.scale_c
                if self.n
                else 0.0
            )
            gapm = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
            metric = max(pres, dres, gapm)
            trace.append((float(mu), float(pres), float(dres), float(gapm)))
            if metric < best_metric:
                best_metric = metric
                best = (st.copy(), pres, dres, gapm, pobj)

            if pres <= cfg.feas_tol and dres <= cfg.feas_tol and gapm <= cfg.gap_tol:
                status = OPTIMAL
                message = "converged"
                best = (st.copy(), pres, dres, gapm, pobj)
                break

            byhz = (float(self.b @ st.y) if self.p else 0.0) + float(self.h @ st.z)
            infeas_res = math.inf
            if byhz < 0:
                infeas_res = (
                    float(
                        np.max(
                            np.abs(
                                (self.A.T @ st.y if self.p else np.zeros(self.n))
                                + self.GT @ st.z
                            )
                        )
                    )
                    * max(self.scale_b, self.scale_h)
                    / (-byhz)
                )
                if infeas_res <= cfg.feas_tol:
                    status = INFEASIBLE
                    message = "primal infeasibility certificate found"
                    certificate = {
                        "type": "primal_infeasible",
                        "residual": infeas_res,
                        "y": np.asarray(st.y / (-byhz), dtype=np.float64),
                        "z": np.asarray(st.z / (-byhz), dtype=np.float64),
                    }
                    break
            cx = float(self.c @ st.x)
            unb_res = math.inf
            if cx < 0:
                unb_res = (
                    max(
                        float(np.max(np.abs(self.A @ st.x))) if self.p else 0.0,
                        float(np.max(np.abs(self.G @ st.x + st.s))),
                    )
                    * self.scale_c
                    / (-cx)
                )
                if unb_res <= cfg.feas_tol:
                    status = UNBOUNDED
                    message = "unboundedness certificate found"
                    certificate = {
                        "type": "dual_infeasible",
                        "residual": unb_res,
                        "ray": np.asarray(st.x / (-cx), dtype=np.float64),
                    }
                    break

            if st.tau <= cfg.tau_kappa_infeasible * max(1.0, st.kappa):
                if infeas_res <= 1e-6:
                    status = INFEASIBLE
                    message = "tau collapsed; loose infeasibility certificate"
                    certificate = {"type": "primal_infeasible", "residual": infeas_res}
                elif unb_res <= 1e-6:
                    status = UNBOUNDED
                    message = "tau collapsed; loose unboundedness certificate"
                    certificate = {"type": "dual_infeasible", "residual": unb_res}
                else:
                    message = "tau collapsed without certificate"
                break
            if mu <= 1e-16 * mu0:
                message = "mu underflow before reaching tolerances"
                break

            try:
                bd = self._blockdata(st.s)
                fact = self._factor(bd, mu)
                rs = (-res_x, -res_y, -res_z, -res_t, -st.z.copy(), -st.kappa)
                d = self._newton(st, bd, fact, mu, rs)
            except (scipy.linalg.LinAlgError, RuntimeError):
                message = "Newton system factorization failed"
                break
            alpha, st_new = self._search_predictor(st, d)
            if alpha <= 0.0:
                stalls += 1
                if stalls >= 3:
                    message = "no progress along predictor direction"
                    break
            else:
                stalls = 0
                st = st_new

            for _ in range(cfg.correctors):
                mu = self._mu(st)
                prox_cur = self._prox(st, mu)
                if prox_cur <= cfg.center_prox:
                    break
                try:
                    bd = self._blockdata(st.s)
                    fact = self._factor(bd, mu)
                    rs = (
                        np.zeros(self.n, dtype=self.dtype),
                        np.zeros(self.p, dtype=self.dtype),
                        np.zeros(self.q, dtype=self.dtype),
                        0.0,
                        -(st.z + mu * self._grad(st.s)),
                        mu / st.tau - st.kappa,
                    )
                    d = self._newton(st, bd, fact, mu, rs)
                except (scipy.linalg.LinAlgError, RuntimeError):
                    break
                alpha_c, st_c = self._search_corrector(st, d, prox_cur)
                if alpha_c <= 0.0:
                    break
                st = st_c
        else:
            iterations = cfg.max_iter

        st_out, pres, dres, gapm, pobj = best if best is not None else (
            st, math.inf, math.inf, math.inf, math.nan
        )
        xbar = st_out.x / st_out.tau if st_out.tau > 0 else st_out.x
        return {
            "status": status,
            "message": message,
            "iterations": iterations + 1,
            "trace": tuple(trace),
            "certificate": certificate,
            "xbar": np.asarray(xbar, dtype=np.float64),
            "pres": float(pres),
            "dres": float(dres),
            "gap": float(gapm),
            "pobj": float(pobj),
        }


# ---------------------------------------------------------------------------
# public solve
# ---------------------------------------------------------------------------


def solve(problem: ConicProblem, config: SolverConfig | None = None) -> SolveResult:
    """Solve a standard-form problem; maximizes ``problem.objective``.

    Returns Optimal with certified residuals, Infeasible/Unbounded with an
    approximate Farkas-type certificate from the homogeneous model, or
    IllConditioned (also used when the iteration cap is exceeded) with the
    best iterate attached.
    """
    cfg = config or SolverConfig()
    if cfg.half_cone_tower:
        rewritten, n_old = rewrite_half_cones(problem)
        inner = solve(rewritten, replace(cfg, half_cone_tower=False))
        if inner.x is not None:
            inner.x = inner.x[:n_old]
            if inner.status == OPTIMAL:
                rep = check_solution(problem, inner.x)
                inner.residuals = Residuals(
                    primal=rep.worst_violation,
                    dual=inner.residuals.dual,
                    gap=inner.residuals.gap,
                )
        return inner

    if not problem.cone_blocks:
        raise ValueError("problem needs at least one cone block")

    red = _presolve(problem)
    if red.infeasible_note is not None:
        return SolveResult(
            status=INFEASIBLE, x=None, obj=None, residuals=None, iterations=0,
            message=f"presolve: {red.infeasible_note}",
        )

    if red.nvar == 0:
        # everything pinned by equalities; feasibility is a constant check
        x = _recover_x(red, np.zeros(0), problem.num_vars)
        rep = check_solution(problem, x)
        scale = 1.0 + (float(np.max(np.abs(red.h))) if red.h.size else 0.0)
        if rep.worst_violation <= 1e-10 * scale:
            return SolveResult(
                status=OPTIMAL, x=x, obj=red.obj_const,
                residuals=Residuals(rep.worst_violation, 0.0, 0.0),
                iterations=0, message="determined by presolve",
            )
        return SolveResult(
            status=INFEASIBLE, x=None, obj=None, residuals=None, iterations=0,
            message="presolve: pinned cone coordinates violate their cone",
        )

    raw = _Hsde(red, cfg).run()
    status = raw["status"]
    if status in (INFEASIBLE, UNBOUNDED):
        cert = raw.get("certificate") or {}
        if status == UNBOUNDED and "ray" in cert:
            cert = dict(cert)
            cert["ray_standard"] = _recover_x(red, cert["ray"], problem.num_vars, ray=True)
        return SolveResult(
            status=status, x=None, obj=None, residuals=None,
            iterations=raw["iterations"], trace=raw["trace"],
            message=raw["message"], certificate=cert or None,
        )

    x = _recover_x(red, raw["xbar"], problem.num_vars)
    rep = check_solution(problem, x)
    residuals = Residuals(primal=rep.worst_violation, dual=raw["dres"], gap=raw["gap"])
    obj = -raw["pobj"] + red.obj_const  # internal minimization of -q.u
    return SolveResult(
        status=status, x=x, obj=obj, residuals=residuals,
        iterations=raw["iterations"], trace=raw["trace"], message=raw["message"],
    )


# ---------------------------------------------------------------------------
# alpha = 1/2 tower rewrite
# ---------------------------------------------------------------------------


def rewrite_half_cones(problem: ConicProblem) -> tuple[ConicProblem, int]:
    """Equivalent problem whose power cones all have alpha = 1/2.

    Each cone x1**(p/q) * x2**(1-p/q) >= |z| becomes a balanced binary tree
    of geometric-mean cones over p copies of x1, q-p copies of x2 and
    2**k - q copies of the introduced bound variable t, followed by
    |z| <= t.  Returns the rewritten problem and the original variable
    count (the leading variables of a solution correspond one-to-one to the
    original ones).
    """
    out = ConicProblem()
    for i in range(problem.num_vars):
        out.add_free(problem.var_names[i])
    for coeffs, rhs in problem.eq_rows:
        out.add_eq(dict(coeffs), rhs)
    out.set_objective(dict(problem.objective))
    out.meta = dict(problem.meta)

    def tree(leaves: list[int]) -> int:
        if len(leaves) == 1:
            return leaves[0]
        mid = len(leaves) // 2
        left = tree(leaves[:mid])
        right = tree(leaves[mid:])
        x1, x2, z = out.add_power(0.5)
        out.add_eq({x1: 1.0, left: -1.0}, 0.0)
        out.add_eq({x2: 1.0, right: -1.0}, 0.0)
        return z

    for blk in problem.cone_blocks:
        if blk.kind == "nonneg":
            slots = out.add_nonneg(len(blk.slots))
            for new, old in zip(slots, blk.slots):
                out.add_eq({new: 1.0, old: -1.0}, 0.0)
            continue
        if abs(blk.alpha - 0.5) <= 1e-12:
            x1, x2, z = out.add_power(0.5)
            for new, old in zip((x1, x2, z), blk.slots):
                out.add_eq({new: 1.0, old: -1.0}, 0.0)
            continue
        frac = Fraction(blk.alpha).limit_denominator(64)
        if abs(float(frac) - blk.alpha) > 1e-12:
            raise ValueError(
                f"alpha={blk.alpha} is not rational with denominator <= 64"
            )
        pnum, qden = frac.numerator, frac.denominator
        x1o, x2o, zo = blk.slots
        t = out.add_free("gm_bound")
        k = max(1, math.ceil(math.log2(qden)))
        leaves = [x1o] * pnum + [x2o] * (qden - pnum) + [t] * (2**k - qden)
        root = tree(leaves)
        out.add_eq({root: 1.0, t: -1.0}, 0.0)
        bx1, bx2, bz = out.add_power(0.5)
        out.add_eq({bx1: 1.0, t: -1.0}, 0.0)
        out.add_eq({bx2: 1.0, t: -1.0}, 0.0)
        out.add_eq({bz: 1.0, zo: -1.0}, 0.0)
    return out, problem.num_vars
