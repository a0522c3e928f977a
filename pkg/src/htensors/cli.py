"""Batch command-line front end.

Subcommands: check, mineig, polybound, verify, decompose.  Reports are
machine-readable JSON by default (``--format text`` for a terse human
summary) and are byte-identical across runs for identical inputs, config
and seed.  Exit codes are the script contract: 0 for member/success, 1 for
a negative verdict, 2 for marginal results, ill-conditioned solves, or
input errors.  Set HTENSOR_LOG=debug|info|warning for stderr logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .conic import SolverConfig
from .errors import ConvergenceError, IllConditionedError
from .membership import (
    Verdict,
    certificate_from_json_dict,
    certificate_to_json_dict,
    decompose,
    is_h_plus,
    is_m_tensor,
    verify_certificate,
)
from .polynomials import (
    lower_bound_ddth,
    lower_bound_gddth,
    poly_from_json_dict,
    sampled_upper_bound,
    tensor_from_poly,
)
from .spectral import (
    bisection_fallback,
    min_h_eigenvalue_conic,
    min_h_eigenvalue_oracle,
    rho_nonnegative,
    to_m_form,
)
from .tensor import tensor_from_json_dict, tensor_to_json_dict

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_ERROR = 2

log = logging.getLogger("htensors")


def _setup_logging() -> None:
    level = os.environ.get("HTENSOR_LOG", "").lower()
    if level in ("debug", "info", "warning", "error"):
        logging.basicConfig(stream=sys.stderr, level=getattr(logging, level.upper()))


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _config(args) -> SolverConfig:
    return SolverConfig(feas_tol=args.tol, gap_tol=args.tol, max_iter=args.max_iter)


def _config_echo(args) -> dict:
    return {
        "feas_tol": args.tol,
        "gap_tol": args.tol,
        "max_iter": args.max_iter,
        "seed": args.seed,
        "format": args.format,
    }


def _emit(report: dict, args) -> None:
    if args.format == "json":
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        for key, val in sorted(report.items()):
            if key in ("certificate", "components", "config", "results"):
                continue
            print(f"{key}: {val}")


def _base_report(command: str, args) -> dict:
    return {"version": __version__, "command": command, "config": _config_echo(args)}


# -- check ---------------------------------------------------------------------


def _check_one(kind: str, path: str, args) -> tuple[int, dict]:
    report = _base_report("check", args)
    report["kind"] = kind
    report["input"] = str(path)
    try:
        tensor = tensor_from_json_dict(_load_json(path))
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        report["error"] = f"cannot read tensor: {exc}"
        return EXIT_ERROR, report
    cfg = _config(args)
    try:
        if kind == "dd":
            member = tensor.is_dd()
            report["verdict"] = "member" if member else "not_member"
            return (EXIT_OK if member else EXIT_FAIL), report
        if kind == "ddplus":
            member = tensor.is_dd_plus()
            report["verdict"] = "member" if member else "not_member"
            return (EXIT_OK if member else EXIT_FAIL), report
        verdict = is_m_tensor(tensor, cfg) if kind == "m" else is_h_plus(tensor, cfg)
    except IllConditionedError as exc:
        report["error"] = f"solver ill-conditioned: {exc}"
        return EXIT_ERROR, report
    report["verdict"] = verdict.kind.value
    if verdict.slack is not None:
        report["slack"] = verdict.slack
    if verdict.infeasibility_note:
        report["note"] = verdict.infeasibility_note
    if verdict.certificate is not None and not args.no_certificate:
        report["certificate"] = certificate_to_json_dict(verdict.certificate)
    if verdict.kind == Verdict.MEMBER:
        return EXIT_OK, report
    if verdict.kind == Verdict.NOT_MEMBER:
        return EXIT_FAIL, report
    return EXIT_ERROR, report


def cmd_check(args) -> int:
    target = Path(args.tensor)
    if target.is_dir():
        files = sorted(str(p) for p in target.glob("*.json"))
        codes = {}
        results = {}
        with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
            futures = {f: pool.submit(_check_one, args.kind, f, args) for f in files}
            for f, fut in futures.items():
                code, rep = fut.result()
                codes[f] = code
                results[f] = rep
        report = _base_report("check", args)
        report["results"] = results
        report["exit_codes"] = codes
        _emit(report, args)
        return max(codes.values(), default=EXIT_ERROR)
    code, report = _check_one(args.kind, args.tensor, args)
    _emit(report, args)
    return code


# -- mineig ----------------------------------------------------------------------


def cmd_mineig(args) -> int:
    report = _base_report("mineig", args)
    report["input"] = args.tensor
    try:
        tensor = tensor_from_json_dict(_load_json(args.tensor))
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        report["error"] = f"cannot read tensor: {exc}"
        _emit(report, args)
        return EXIT_ERROR
    cfg = _config(args)
    try:
        verdict = is_m_tensor(tensor, cfg)
    except IllConditionedError as exc:
        report["error"] = f"solver ill-conditioned: {exc}"
        _emit(report, args)
        return EXIT_ERROR
    if verdict.kind == Verdict.NOT_MEMBER:
        report["error"] = f"not an M-tensor: {verdict.infeasibility_note}"
        _emit(report, args)
        return EXIT_ERROR

    methods = {}
    wanted = ["conic", "oracle", "bisect"] if args.method == "all" else [args.method]
    try:
        for name in wanted:
            if name == "conic":
                res = min_h_eigenvalue_conic(tensor, cfg)
                methods["conic"] = {
                    "lambda": res.lam,
                    "method": "conic",
                    "residual": res.residual,
                    "iterations": res.iterations,
                    "perturbed": False,
                }
            elif name == "oracle":
                form = to_m_form(tensor)
                if len(form.D) == 0:
                    methods["oracle"] = {
                        "lambda": float(np.min(tensor.diagonal())),
                        "method": "oracle",
                        "residual": 0.0,
                        "iterations": 0,
                        "perturbed": False,
                    }
                else:
                    rho = rho_nonnegative(form.D)
                    methods["oracle"] = {
                        "lambda": form.s - rho.lam,
                        "method": "oracle",
                        "residual": rho.residual,
                        "iterations": rho.iterations,
                        "perturbed": rho.perturbed,
                    }
            elif name == "bisect":
                lam = bisection_fallback(tensor, tol=max(args.tol, 1e-8), config=cfg)
                methods["bisect"] = {
                    "lambda": lam,
                    "method": "bisect",
                    "residual": max(args.tol, 1e-8),
                    "iterations": 0,
                    "perturbed": False,
                }
    except (ValueError, ConvergenceError, IllConditionedError) as exc:
        report["error"] = str(exc)
        _emit(report, args)
        return EXIT_ERROR

    if args.method == "all":
        lams = [m["lambda"] for m in methods.values()]
        report["max_discrepancy"] = max(lams) - min(lams)
        report["methods"] = methods
        report["lambda"] = methods["conic"]["lambda"]
    else:
        report.update(methods[args.method])
    _emit(report, args)
    return EXIT_OK


# -- polybound ---------------------------------------------------------------------


def cmd_polybound(args) -> int:
    report = _base_report("polybound", args)
    report["input"] = args.poly
    try:
        poly = poly_from_json_dict(_load_json(args.poly))
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        report["error"] = f"cannot read polynomial: {exc}"
        _emit(report, args)
        return EXIT_ERROR
    if poly.degree % 2 != 0:
        report["error"] = f"degree {poly.degree} is odd; even degree required"
        _emit(report, args)
        return EXIT_ERROR
    tensor = tensor_from_poly(poly)
    cfg = _config(args)
    try:
        if args.cone in ("ddth", "both"):
            report["ddth"] = lower_bound_ddth(tensor)
        if args.cone in ("gddth", "both"):
            report["gddth"] = lower_bound_gddth(tensor, cfg)
        if args.cone == "both":
            report["upper"] = sampled_upper_bound(tensor, seed=args.seed)
            report["ordering_ok"] = bool(
                report["ddth"] <= report["gddth"] + 1e-7 * (1 + abs(report["gddth"]))
                and report["gddth"] <= report["upper"] + 1e-6 * (1 + abs(report["upper"]))
            )
    except IllConditionedError as exc:
        report["error"] = f"solver ill-conditioned: {exc}"
        _emit(report, args)
        return EXIT_ERROR
    _emit(report, args)
    return EXIT_OK


# -- verify -------------------------------------------------------------------------


def cmd_verify(args) -> int:
    report = _base_report("verify", args)
    report["tensor"] = args.tensor
    report["certificate_file"] = args.certificate
    try:
        tensor = tensor_from_json_dict(_load_json(args.tensor))
        cert_data = _load_json(args.certificate)
        if "certificate" in cert_data:  # accept a full check report
            cert_data = cert_data["certificate"]
        cert = certificate_from_json_dict(cert_data)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        report["error"] = f"cannot read input: {exc}"
        _emit(report, args)
        return EXIT_ERROR
    try:
        check = verify_certificate(tensor, cert, tol=args.tol * max(1.0, tensor.max_abs()))
    except ValueError as exc:
        report["error"] = str(exc)
        _emit(report, args)
        return EXIT_ERROR
    report["ok"] = check.ok
    report["worst_row_margin"] = check.worst_row_margin
    report["worst_cone_margin"] = check.worst_cone_margin
    if check.violations:
        report["violations"] = list(check.violations)
    _emit(report, args)
    return EXIT_OK if check.ok else EXIT_FAIL


# -- decompose -------------------------------------------------------------------------


def cmd_decompose(args) -> int:
    report = _base_report("decompose", args)
    report["input"] = args.tensor
    try:
        tensor = tensor_from_json_dict(_load_json(args.tensor))
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        report["error"] = f"cannot read tensor: {exc}"
        _emit(report, args)
        return EXIT_ERROR
    cfg = _config(args)
    try:
        verdict = is_h_plus(tensor, cfg)
    except IllConditionedError as exc:
        report["error"] = f"solver ill-conditioned: {exc}"
        _emit(report, args)
        return EXIT_ERROR
    report["verdict"] = verdict.kind.value
    if verdict.certificate is None:
        report["error"] = verdict.infeasibility_note or "no certificate available"
        _emit(report, args)
        return EXIT_FAIL if verdict.kind == Verdict.NOT_MEMBER else EXIT_ERROR
    components = decompose(tensor, verdict.certificate)
    total = components[0]
    for comp in components[1:]:
        total = total + comp
    err = max(
        (
            abs(total.entries.get(k, 0.0) - tensor.entries.get(k, 0.0))
            for k in set(total.entries) | set(tensor.entries)
        ),
        default=0.0,
    )
    report["components"] = [tensor_to_json_dict(c) for c in components]
    report["reconstruction_error"] = err
    _emit(report, args)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="htensors",
        description="H+ tensor membership, certificates, M-tensor eigenvalues, "
        "and polynomial lower bounds",
    )
    ap.add_argument("--tol", type=float, default=1e-8, help="solver tolerance")
    ap.add_argument("--max-iter", type=int, default=200, help="solver iteration cap")
    ap.add_argument("--seed", type=int, default=0, help="seed for sampling subcommands")
    ap.add_argument("--format", choices=("json", "text"), default="json")
    ap.add_argument("--jobs", type=int, default=1, help="parallel workers for directories")
    sub = ap.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="membership checks")
    p_check.add_argument("kind", choices=("dd", "ddplus", "hplus", "m"))
    p_check.add_argument("tensor", help="tensor JSON file or directory of them")
    p_check.add_argument("--no-certificate", action="store_true")
    p_check.set_defaults(func=cmd_check)

    p_mineig = sub.add_parser("mineig", help="minimum H-eigenvalue of an M-tensor")
    p_mineig.add_argument("tensor")
    p_mineig.add_argument(
        "--method", choices=("conic", "oracle", "bisect", "all"), default="conic"
    )
    p_mineig.set_defaults(func=cmd_mineig)

    p_poly = sub.add_parser("polybound", help="lower bounds for even-degree forms")
    p_poly.add_argument("poly")
    p_poly.add_argument("--cone", choices=("ddth", "gddth", "both"), default="both")
    p_poly.set_defaults(func=cmd_polybound)

    p_verify = sub.add_parser("verify", help="verify a membership certificate")
    p_verify.add_argument("tensor")
    p_verify.add_argument("certificate")
    p_verify.set_defaults(func=cmd_verify)

    p_dec = sub.add_parser("decompose", help="sparse component decomposition")
    p_dec.add_argument("tensor")
    p_dec.set_defaults(func=cmd_decompose)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
