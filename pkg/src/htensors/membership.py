"""Membership of symmetric tensors in the H+ (generalized diagonally
dominant with nonnegative diagonal) and M-tensor cones.

Membership is decided through a conic feasibility system with one chain of
3-dimensional power cones per nonzero off-diagonal permutation class: the
chain bounds the geometric mean of the per-row weights b^i_j against the
combinatorial constant times |a_i|, while nonnegative row slacks couple the
weights to the diagonal.  The feasibility phase maximizes the minimum
diagonal slack, so a strictly positive optimum certifies interior
membership and a negative one certifies non-membership; near-zero optima
are surfaced as Marginal.

Certificates carry the per-entry weights and can be re-verified by direct
evaluation (optionally in exact rational arithmetic), turned into an
explicit decomposition into sparse single-class components, and scaled
component-wise back to plain diagonal dominance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .conic import ConicProblem, SolverConfig, SolveResult, OPTIMAL, solve
from .errors import DegenerateCertificateError, IllConditionedError
from .multiindex import (
    MultiIndex,
    diagonal_index,
    dominance_constant,
    is_diagonal,
    slice_count,
    tight_pair,
)
from .tensor import SymmetricTensor

__all__ = [
    "Verdict",
    "MembershipVerdict",
    "GddCertificate",
    "CertificateReport",
    "ComponentScaling",
    "build_feasibility",
    "gdd_slack_program",
    "is_h_plus",
    "is_m_tensor",
    "verify_certificate",
    "decompose",
    "component_scaling",
    "certificate_to_json_dict",
    "certificate_from_json_dict",
]


class Verdict(enum.Enum):
    MEMBER = "member"
    NOT_MEMBER = "not_member"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class GddCertificate:
    """Witness for H+ membership.

    ``b`` maps (off-diagonal multi-index, distinct index j) to the
    nonnegative diagonal weight b^i_j; ``aux`` holds the chained
    geometric-mean values per (multi-index, level); ``diag_slack`` is the
    per-row residual diagonal minus the sum of incident weights.
    """

    b: dict[tuple[MultiIndex, int], float]
    aux: dict[tuple[MultiIndex, int], float]
    diag_slack: tuple[float, ...]
    tol: float = 1e-8


@dataclass(frozen=True)
class CertificateReport:
    ok: bool
    worst_row_margin: float
    worst_cone_margin: float  # relative to max(1, c*|a|^m)
    violations: tuple[str, ...] = ()
    exact: bool = False

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class ComponentScaling:
    """Positive per-distinct-index scaling turning one sparse component
    diagonally dominant."""

    index: MultiIndex
    d: dict[int, float]

    def as_vector(self, n: int) -> np.ndarray:
        out = np.ones(n)
        for j, v in self.d.items():
            out[j - 1] = v
        return out


@dataclass(frozen=True)
class MembershipVerdict:
    kind: Verdict
    certificate: GddCertificate | None = None
    infeasibility_note: str | None = None
    slack: float | None = None


def _chain_alphas(m: int) -> list[float]:
    # exponents 1/m, 1/(m-1), ..., 1/2 along the chain
    return [1.0 / j for j in range(m, 1, -1)]


def _nonzero_offdiagonal(a: SymmetricTensor):
    return [
        (idx, val) for idx, val in a.items() if not is_diagonal(idx) and val != 0.0
    ]


def build_feasibility(a: SymmetricTensor) -> ConicProblem:
    """Conic program deciding H+ membership of ``a``.

    Variables: one weight b^i_j per (off-diagonal class i with a_i != 0,
    distinct j in i), chained auxiliaries per class, one nonnegative slack
    per diagonal row, and a free scalar entering every diagonal row whose
    maximization yields the minimum diagonal slack.  Classes with a_i == 0
    contribute no cone.  Repeated indices inside i share a single weight,
    enforced by alias rows between cone slots.
    """
    m, n = a.order, a.dim
    if m < 2:
        raise ValueError(f"order must be at least 2, got {m}")
    prob = ConicProblem()
    lam = prob.add_free("lam")
    b_var: dict[tuple[MultiIndex, int], int] = {}
    aux_var: dict[tuple[MultiIndex, int], int] = {}
    for idx, val in _nonzero_offdiagonal(a):
        c = dominance_constant(idx)
        zval = float(c) ** (1.0 / m) * val
        cones = [prob.add_power(al) for al in _chain_alphas(m)]
        # x1 slots carry the chain of diagonal weights; the last cone also
        # uses its x2 slot for the final weight
        d_slots = [cones[t][0] for t in range(len(cones))]
        d_slots.append(cones[-1][1])
        for t in range(len(cones) - 1):
            v_owner = cones[t][1]
            aux_var[(idx, t + 1)] = v_owner
            prob.add_eq({cones[t + 1][2]: 1.0, v_owner: -1.0}, 0.0)
        prob.add_eq({cones[0][2]: 1.0}, zval)
        for pos, j in enumerate(idx):
            slot = d_slots[pos]
            key = (idx, j)
            if key in b_var:
                prob.add_eq({slot: 1.0, b_var[key]: -1.0}, 0.0)
            else:
                b_var[key] = slot
    slacks = prob.add_nonneg(n, name="rowslack")
    diag = a.diagonal()
    for j in range(1, n + 1):
        coeffs = {lam: 1.0, slacks[j - 1]: 1.0}
        for (idx, jj), var in b_var.items():
            if jj == j:
                coeffs[var] = 1.0
        prob.add_eq(coeffs, float(diag[j - 1]))
    prob.set_objective({lam: 1.0})
    prob.meta = {
        "lam": lam,
        "b_vars": b_var,
        "aux_vars": aux_var,
        "slacks": slacks,
        "order": m,
        "dim": n,
    }
    return prob


def gdd_slack_program(
    a: SymmetricTensor, config: SolverConfig | None = None
) -> tuple[float, SolveResult, ConicProblem]:
    """Maximize the minimum diagonal slack of the membership system.

    The optimum equals max{lambda : subtracting lambda from every diagonal
    entry keeps the tensor in the H+ cone}; membership holds iff it is
    nonnegative.  Raises IllConditionedError when the solver cannot certify
    an optimum.
    """
    prob = build_feasibility(a)
    res = solve(prob, config or SolverConfig())
    if res.status != OPTIMAL:
        raise IllConditionedError(
            f"membership solve ended with status {res.status}: {res.message}"
        )
    return float(res.obj), res, prob


def _dd_certificate(a: SymmetricTensor, tol: float) -> GddCertificate:
    """Explicit certificate for a diagonally dominant tensor with
    nonnegative diagonal: b^i_j = slice_count * |a_i|."""
    m = a.order
    b: dict[tuple[MultiIndex, int], float] = {}
    aux: dict[tuple[MultiIndex, int], float] = {}
    for idx, val in _nonzero_offdiagonal(a):
        tp = tight_pair(idx)
        weights = {}
        for k, j in enumerate(tp.distinct, start=1):
            w = slice_count(idx, k) * abs(val)
            b[(idx, j)] = w
            weights[j] = w
        d_seq = [weights[j] for j in idx]
        for level in range(1, m - 1):
            rest = d_seq[level:]
            aux[(idx, level)] = float(np.prod(rest) ** (1.0 / len(rest)))
    slack = a.diagonal() - a.row_offdiagonal_abs_sums()
    return GddCertificate(b=b, aux=aux, diag_slack=tuple(float(v) for v in slack), tol=tol)


def _extract_certificate(
    a: SymmetricTensor, prob: ConicProblem, x: np.ndarray, tol: float
) -> GddCertificate:
    meta = prob.meta
    b = {key: max(float(x[var]), 0.0) for key, var in meta["b_vars"].items()}
    aux = {key: float(x[var]) for key, var in meta["aux_vars"].items()}
    sums = np.zeros(a.dim)
    for (idx, j), val in b.items():
        sums[j - 1] += val
    slack = a.diagonal() - sums
    return GddCertificate(b=b, aux=aux, diag_slack=tuple(float(v) for v in slack), tol=tol)


def is_h_plus(
    a: SymmetricTensor, config: SolverConfig | None = None
) -> MembershipVerdict:
    """Decide membership in the cone of symmetric H+ tensors.

    Member verdicts carry a certificate accepted by ``verify_certificate``.
    Exactly diagonally dominant inputs (nonnegative diagonal) short-circuit
    to Member with the explicit slice-count certificate, which keeps
    boundary cases such as the zero tensor inside the closed cone.  The
    verdict is Marginal when the optimal minimum slack is within
    10 * feas_tol (scaled by the largest diagonal entry) of zero.
    """
    cfg = config or SolverConfig()
    if a.order < 2:
        raise ValueError(f"order must be at least 2, got {a.order}")
    diag = a.diagonal()
    if np.any(diag < 0.0):
        j = int(np.argmin(diag)) + 1
        return MembershipVerdict(
            Verdict.NOT_MEMBER,
            infeasibility_note=f"negative diagonal entry at row {j}",
        )
    incident = set()
    for idx, _ in _nonzero_offdiagonal(a):
        incident.update(tight_pair(idx).distinct)
    for j in sorted(incident):
        if diag[j - 1] == 0.0:
            return MembershipVerdict(
                Verdict.NOT_MEMBER,
                infeasibility_note=(
                    f"zero diagonal at row {j} with nonzero incident off-diagonal"
                ),
            )
    if a.is_dd_plus():
        cert = _dd_certificate(a, cfg.feas_tol)
        slack = float(np.min(np.asarray(cert.diag_slack))) if cert.diag_slack else 0.0
        return MembershipVerdict(Verdict.MEMBER, certificate=cert, slack=slack)

    tstar, res, prob = gdd_slack_program(a, cfg)
    thr = 10.0 * cfg.feas_tol * max(1.0, float(np.max(np.abs(diag))) if a.dim else 0.0)
    cert = _extract_certificate(a, prob, res.x, cfg.feas_tol)
    check_tol = max(100.0 * cfg.feas_tol, 1e-10) * max(1.0, a.max_abs())
    report = verify_certificate(a, cert, tol=check_tol)
    if tstar > thr:
        if report.ok:
            return MembershipVerdict(Verdict.MEMBER, certificate=cert, slack=tstar)
        return MembershipVerdict(
            Verdict.MARGINAL,
            certificate=None,
            infeasibility_note=f"solver slack {tstar:.3e} but certificate check failed",
            slack=tstar,
        )
    if tstar < -thr:
        return MembershipVerdict(
            Verdict.NOT_MEMBER,
            infeasibility_note=(
                f"maximum of the minimum diagonal slack is {tstar:.6e} < 0"
            ),
            slack=tstar,
        )
    return MembershipVerdict(
        Verdict.MARGINAL,
        certificate=cert if report.ok else None,
        infeasibility_note=f"minimum diagonal slack {tstar:.3e} within tolerance of zero",
        slack=tstar,
    )


def is_m_tensor(
    a: SymmetricTensor, config: SolverConfig | None = None
) -> MembershipVerdict:
    """Member iff the tensor is a Z-tensor and an H+ tensor."""
    for idx, val in a.items():
        if not is_diagonal(idx) and val > 0.0:
            return MembershipVerdict(
                Verdict.NOT_MEMBER,
                infeasibility_note=f"positive off-diagonal entry {val} at {idx}",
            )
    return is_h_plus(a, config)


def _structure_keys(a: SymmetricTensor) -> set[tuple[MultiIndex, int]]:
    keys = set()
    for idx, _ in _nonzero_offdiagonal(a):
        for j in tight_pair(idx).distinct:
            keys.add((idx, j))
    return keys


def verify_certificate(
    a: SymmetricTensor,
    cert: GddCertificate,
    tol: float = 1e-8,
    exact: bool = False,
) -> CertificateReport:
    """Check both certificate inequality families by direct evaluation.

    Verifies b >= 0, per-row diagonal coverage, and the per-class product
    inequality prod_k b_k^{alpha_k} >= c(i) |a_i|^m.  No solver involved.
    With ``exact=True`` all comparisons run in rational arithmetic on the
    exact binary values of the floats.  Raises ValueError when the
    certificate does not structurally match the tensor.
    """
    expected = _structure_keys(a)
    if set(cert.b) != expected or len(cert.diag_slack) != a.dim:
        raise ValueError("certificate does not match the tensor's structure")
    m = a.order
    violations: list[str] = []

    def num(v):
        return Fraction(v) if exact else float(v)

    tol_n = num(tol)
    worst_row = math.inf
    sums = {j: num(0) for j in range(1, a.dim + 1)}
    for (idx, j), val in cert.b.items():
        if num(val) < -tol_n * max(num(1), abs(num(val))):
            violations.append(f"negative weight b[{idx},{j}] = {val}")
        sums[j] += num(val)
    diag = a.diagonal()
    for j in range(1, a.dim + 1):
        margin = num(float(diag[j - 1])) - sums[j]
        worst_row = min(worst_row, float(margin))
        if margin < -tol_n * max(num(1), abs(num(float(diag[j - 1])))):
            violations.append(f"diagonal row {j} undercovered by {float(margin)}")
    worst_cone = math.inf
    for idx, val in _nonzero_offdiagonal(a):
        tp = tight_pair(idx)
        c = dominance_constant(idx)
        lhs = num(1)
        for j, p in zip(tp.distinct, tp.powers):
            bj = max(num(cert.b[(idx, j)]), num(0))
            lhs = lhs * bj**p
        rhs = num(c) * abs(num(val)) ** m
        scale = max(num(1), rhs)
        rel = float((lhs - rhs) / scale)
        worst_cone = min(worst_cone, rel)
        if lhs - rhs < -tol_n * scale:
            violations.append(
                f"product inequality violated at {idx}: lhs {float(lhs)} < rhs {float(rhs)}"
            )
    if worst_row is math.inf:
        worst_row = float(np.min(diag)) if a.dim else 0.0
    if worst_cone is math.inf:
        worst_cone = 0.0
    return CertificateReport(
        ok=not violations,
        worst_row_margin=float(worst_row),
        worst_cone_margin=float(worst_cone),
        violations=tuple(violations),
        exact=exact,
    )


def decompose(a: SymmetricTensor, cert: GddCertificate) -> list[SymmetricTensor]:
    """Split the tensor into per-class sparse components plus a diagonal
    remainder, exactly summing back to the input.

    Each component carries the off-diagonal entry of one permutation class
    and the certificate weights on the touched diagonal; the remainder holds
    the diagonal slacks.  The certificate is re-verified first.
    """
    report = verify_certificate(a, cert, tol=max(cert.tol, 1e-10) * max(1.0, a.max_abs()))
    if not report.ok:
        raise ValueError(
            "certificate failed verification: " + "; ".join(report.violations[:3])
        )
    m = a.order
    components = []
    for idx, val in sorted(_nonzero_offdiagonal(a)):
        entries = {idx: val}
        for j in tight_pair(idx).distinct:
            entries[diagonal_index(j, m)] = cert.b[(idx, j)]
        components.append(SymmetricTensor(m, a.dim, entries))
    remainder = SymmetricTensor(
        m,
        a.dim,
        {
            diagonal_index(j, m): cert.diag_slack[j - 1]
            for j in range(1, a.dim + 1)
        },
    )
    components.append(remainder)
    return components


def component_scaling(idx: MultiIndex, b_values) -> ComponentScaling:
    """Positive scaling making one sparse component diagonally dominant.

    ``b_values`` maps each distinct index j of ``idx`` to its weight; all
    weights must be strictly positive.  The scaling is
    d_j = (slice_count / b_j) ** (1/m).
    """
    tp = tight_pair(idx)
    if tp.length < 2:
        raise ValueError(f"index {idx} is diagonal")
    m = len(idx)
    d: dict[int, float] = {}
    for k, j in enumerate(tp.distinct, start=1):
        bj = float(b_values[j])
        if bj <= 0.0:
            raise DegenerateCertificateError(
                f"weight for index {j} must be positive, got {bj}"
            )
        d[j] = (slice_count(idx, k) / bj) ** (1.0 / m)
    return ComponentScaling(index=idx, d=d)


# -- certificate JSON ---------------------------------------------------------


def certificate_to_json_dict(cert: GddCertificate) -> dict:
    return {
        "b": [
            {"idx": list(idx), "j": j, "val": val}
            for (idx, j), val in sorted(cert.b.items())
        ],
        "aux": [
            {"idx": list(idx), "level": level, "val": val}
            for (idx, level), val in sorted(cert.aux.items())
        ],
        "diag_slack": list(cert.diag_slack),
        "tol": cert.tol,
    }


def certificate_from_json_dict(data: dict) -> GddCertificate:
    try:
        b = {
            (tuple(item["idx"]), int(item["j"])): float(item["val"])
            for item in data["b"]
        }
        aux = {
            (tuple(item["idx"]), int(item["level"])): float(item["val"])
            for item in data.get("aux", [])
        }
        slack = tuple(float(v) for v in data["diag_slack"])
        tol = float(data.get("tol", 1e-8))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed certificate JSON: {exc}") from exc
    return GddCertificate(b=b, aux=aux, diag_slack=slack, tol=tol)
