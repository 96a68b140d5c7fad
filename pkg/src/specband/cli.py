"""Command-line entry point.

Subcommands: direct, inverse, verify, roundtrip, selftest. The report goes
to stdout (canonical JSON, or a text table with ``--format text``);
diagnostics and timing go to stderr so stdout stays byte-reproducible.

Exit codes: 0 pass, 1 malformed input, 2 infeasible data or failed checks.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .corpus import corpus
from .direct import EQ_TOL_BASE, classify_and_verify, full_spectrum
from .errors import InvalidData, InvalidMatrix, ParseError, SpecbandError, VerificationFailed
from .inverse import (
    VERIFY_TOL,
    SpectralData,
    enumerate_solutions,
    feasibility_check,
    matrix_distance,
    reconstruct_branch,
    verify_reconstruction,
)
from .io import (
    canonical_json,
    complex_list,
    complex_to_json,
    digest,
    instance_payload,
    parse_instance,
    real_list,
)
from .matrices import PeriodicMatrixGeneral, PeriodicMatrixHat

EXIT_PASS, EXIT_INPUT, EXIT_FAIL = 0, 1, 2
MATCH_TOL = 1e-7


@dataclass
class RunReport:
    command: str
    input_digest: str
    outputs: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    status: str = "pass"

    def check(self, name: str, passed: bool, detail: str = "") -> bool:
        self.checks.append({"name": name, "passed": bool(passed), "detail": detail})
        if not passed:
            self.status = "fail"
        return bool(passed)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "input_digest": self.input_digest,
            "outputs": self.outputs,
            "checks": self.checks,
            "status": self.status,
        }

    @property
    def exit_code(self) -> int:
        return EXIT_PASS if self.status == "pass" else EXIT_FAIL


class InputError(Exception):
    pass


def _threads() -> int | None:
    raw = os.environ.get("SPECBAND_THREADS")
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"SPECBAND_THREADS must be an integer, got {raw!r}") from None
    if value < 1:
        raise InputError("SPECBAND_THREADS must be at least 1")
    return value


def _read(path: str) -> tuple[str, str]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return raw.decode("utf-8"), digest(raw)
    except UnicodeDecodeError:
        raise InputError(f"{path}: not valid UTF-8") from None


def _load(path: str, kinds: tuple):
    text, dig = _read(path)
    try:
        inst = parse_instance(text)
    except (ParseError, InvalidMatrix, InvalidData) as exc:
        raise InputError(f"{path}: {exc}") from None
    if inst.kind not in kinds:
        raise InputError(f"{path}: expected kind {' or '.join(kinds)}, got {inst.kind}")
    return inst, dig


def _tol(args, inst=None) -> float:
    if args.tol is not None:
        return args.tol
    if inst is not None and inst.tol is not None:
        return inst.tol
    return EQ_TOL_BASE


# Report fragments


def _direct_outputs(rep) -> dict:
    return {
        "n": rep.n,
        "regime": rep.regime,
        "lambda": complex_list(rep.lambda_),
        "multiplicities": list(rep.multiplicities),
        "mu": real_list(rep.mu),
        "beta": complex_to_json(rep.beta),
        "a_n": complex_to_json(rep.a_n),
        "chi_n": complex_list(rep.chi_n.coeffs),
        "chi_n_at_mu": complex_list(rep.chi_n_at_mu),
        "chi_prime_at_mu": real_list(rep.chi_prime_at_mu),
        "alpha": real_list(rep.alpha.alpha),
        "root_residual": rep.root_residual,
    }


def _feasibility_outputs(fr) -> dict:
    return {
        "regime": fr.regime,
        "passed": fr.passed,
        "m1": fr.m1,
        "m2": fr.m2,
        "equality_count": fr.m,
        "branch_count": fr.branch_count,
        "a_hat_n": complex_to_json(fr.a_hat),
        "failures": list(fr.failures),
        "per_k": [
            {
                "k": r.k,
                "chi_n_at_mu": r.chi.real,
                "sign_margin": r.sign_margin,
                "modulus_margin": r.modulus_margin,
                "sign_equal": r.sign_equal,
                "modulus_equal": r.modulus_equal,
                "tau_eq": float(fr.tau_eq[r.k - 1]),
            }
            for r in fr.rows
        ],
    }


def _solution_outputs(sol, ver) -> dict:
    return {
        "selector": list(sol.selector),
        "matrix": instance_payload(sol.matrix)[1],
        "x_first": real_list(sol.X),
        "x_last": real_list(sol.Y),
        "weights": real_list(sol.weights),
        "psi": complex_list(sol.psi.coeffs),
        "verification": {
            "lambda_residual": ver.lambda_residual,
            "mu_residual": ver.mu_residual,
            "beta_residual": ver.beta_residual,
            "weight_sum_residual": ver.weight_sum_residual,
            "b_nm1_residual": ver.b_nm1_residual,
        },
    }


# Subcommands


def cmd_direct(args) -> RunReport:
    inst, dig = _load(args.file, ("matrix-general", "matrix-hat"))
    rep = classify_and_verify(full_spectrum(inst.value, _tol(args, inst)), inst.value)
    out = RunReport("direct", dig, outputs=_direct_outputs(rep))
    for c in rep.checks:
        out.check(c.name, c.passed, c.witness)
    return out


def _inverse_report(d: SpectralData, tol: float, args, command: str, dig: str) -> RunReport:
    fr = feasibility_check(d, tol)
    out = RunReport(command, dig, outputs={"feasibility": _feasibility_outputs(fr)})
    if not out.check("feasible", fr.passed, "; ".join(fr.failures)):
        return out
    if args.all_branches:
        sols = enumerate_solutions(d, tol, max_workers=_threads())
    else:
        sols = [reconstruct_branch(d, args.branch, fr, tol)]
    route = "lapack" if args.all_branches else "direct"
    rendered = []
    for sol in sols:
        try:
            ver = verify_reconstruction(sol, d, VERIFY_TOL, route)
        except VerificationFailed as exc:
            ver = exc.report
        label = "".join(str(b) for b in sol.selector) or "-"
        out.check(f"verify[{label}]", ver.passed, f"worst={ver.worst:.3e}")
        rendered.append(_solution_outputs(sol, ver))
    out.outputs["solutions"] = rendered
    if args.all_branches:
        out.check("solution_count", len(sols) == fr.branch_count,
                  f"found={len(sols)} expected={fr.branch_count}")
    return out


def cmd_inverse(args) -> RunReport:
    inst, dig = _load(args.file, ("spectral-data",))
    try:
        return _inverse_report(inst.value, _tol(args, inst), args, "inverse", dig)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_verify(args) -> RunReport:
    m_inst, m_dig = _load(args.matrix_file, ("matrix-general", "matrix-hat"))
    d_inst, d_dig = _load(args.data_file, ("spectral-data",))
    out = RunReport("verify", digest(m_dig + d_dig))
    try:
        ver = verify_reconstruction(m_inst.value, d_inst.value, args.verify_tol)
    except VerificationFailed as exc:
        ver = exc.report
    out.outputs = {
        "lambda_residual": ver.lambda_residual,
        "mu_residual": ver.mu_residual,
        "beta_residual": ver.beta_residual,
    }
    out.check("reconstruction_matches_data", ver.passed, f"worst={ver.worst:.3e}")
    return out


def roundtrip_one(m, tol: float, workers=None) -> dict:
    """direct -> spectral data -> every branch -> closest branch to ``m``."""
    rep = full_spectrum(m, tol)
    d = SpectralData(rep.lambda_, rep.mu, rep.beta)
    fr = feasibility_check(d, tol)
    row = {"n": rep.n, "regime": rep.regime, "branch_count": fr.branch_count}
    if not fr.passed:
        row.update(found=0, best_match=None, failure="; ".join(fr.failures))
        return row
    sols = enumerate_solutions(d, tol, max_workers=workers)
    dists = [matrix_distance(m, s.matrix) for s in sols]
    best = int(np.argmin(dists))
    row.update(found=len(sols), best_match=float(dists[best]),
               best_selector=list(sols[best].selector))
    return row


def cmd_roundtrip(args) -> RunReport:
    if args.file:
        inst, dig = _load(args.file, ("matrix-general", "matrix-hat"))
        matrices = [inst.value]
        tol = _tol(args, inst)
    else:
        dig = digest(canonical_json({"count": args.count, "seed": args.seed}))
        matrices = corpus(args.seed, args.count)
        tol = _tol(args)
    workers = _threads()
    out = RunReport("roundtrip", dig)
    rows = []
    for i, m in enumerate(matrices):
        try:
            row = roundtrip_one(m, tol, workers)
        except SpecbandError as exc:
            row = {"n": m.n, "found": 0, "best_match": None, "failure": f"{type(exc).__name__}: {exc}"}
        row["index"] = i
        rows.append(row)
    counts_ok = all(r["found"] == r.get("branch_count") for r in rows)
    matched = [r["best_match"] for r in rows if r["best_match"] is not None]
    worst = max(matched) if len(matched) == len(rows) else None
    out.outputs = {"instances": rows, "max_residual": worst, "tolerance": MATCH_TOL}
    out.check("branch_counts", counts_ok)
    out.check("source_recovered", worst is not None and worst <= MATCH_TOL,
              "" if worst is None else f"max_residual={worst:.3e}")
    return out


def selftest_fixtures():
    s3 = np.sqrt(3.0)
    return {
        "matrix": PeriodicMatrixHat([0.0, 0.0], [1.0, 1.0], 1j, 0.0),
        "data": SpectralData([-s3, 0.0, s3], [-1.0, 1.0], 1j),
        "data_rejected": SpectralData([-s3, 0.0, s3], [-1.0, 1.0], 2j),
        "data_real_beta": SpectralData([-2.0, 0.0, 2.0], [-1.0, 1.0], -0.25),
        "matrix_real_beta": PeriodicMatrixGeneral([0.0, 0.0], [1.0, 1.0, 1.0], 0.0),
    }


def cmd_selftest(args) -> RunReport:
    fx = selftest_fixtures()
    out = RunReport("selftest", digest("selftest"))
    rep = classify_and_verify(full_spectrum(fx["matrix"]), fx["matrix"])
    s3 = np.sqrt(3.0)
    lam_err = float(np.max(np.abs(np.sort(rep.lambda_.real) - [-s3, 0.0, s3])))
    out.check("direct_worked_spectrum", lam_err <= 1e-12, f"err={lam_err:.3e}")
    out.check("direct_worked_checks", rep.passed, ",".join(rep.failed_checks()))

    rep = classify_and_verify(full_spectrum(fx["matrix_real_beta"]), fx["matrix_real_beta"])
    out.check("direct_real_beta_checks", rep.passed, ",".join(rep.failed_checks()))
    out.check("direct_real_beta_double_root", 2 in rep.multiplicities,
              f"multiplicities={list(rep.multiplicities)}")

    sols = enumerate_solutions(fx["data"])
    dist = matrix_distance(fx["matrix"], sols[0].matrix) if sols else float("inf")
    out.check("inverse_worked_unique", len(sols) == 1, f"solutions={len(sols)}")
    out.check("inverse_worked_matrix", dist <= 1e-10, f"distance={dist:.3e}")

    fr = feasibility_check(fx["data_rejected"])
    margins = [r.modulus_margin for r in fr.rows]
    out.check("inverse_rejects_beta_2i",
              not fr.passed and all(abs(x + 2.0) <= 1e-12 for x in margins),
              f"margins={[round(x, 12) for x in margins]}")

    sols = enumerate_solutions(fx["data_real_beta"])
    out.check("inverse_real_beta_four_branches", len(sols) == 4, f"solutions={len(sols)}")
    out.outputs = {"checks_run": len(out.checks)}
    return out


# Rendering


def render_text(report: RunReport) -> str:
    lines = [f"command: {report.command}", f"input:   {report.input_digest}", ""]
    width = max([len(c["name"]) for c in report.checks] + [5])
    for c in report.checks:
        mark = "PASS" if c["passed"] else "FAIL"
        lines.append(f"  {mark}  {c['name']:<{width}}  {c['detail']}".rstrip())
    per_k = report.outputs.get("feasibility", {}).get("per_k")
    if per_k:
        lines += ["", "  k  chi_n(mu_k)            sign margin            modulus margin"]
        for r in per_k:
            lines.append(f"  {r['k']:<2} {r['chi_n_at_mu']:<22.15g} {r['sign_margin']:<22.15g} "
                         f"{r['modulus_margin']:.15g}")
    if report.command == "roundtrip":
        lines.append("")
        lines.append(f"  max residual: {report.outputs.get('max_residual')}")
    lines += ["", f"status: {report.status}"]
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None,
                        help="base of the equality/realness threshold (default 1e-8)")
    common.add_argument("--format", choices=("json", "text"), default="json")

    parser = argparse.ArgumentParser(
        prog="specband",
        description="Direct and inverse spectral problems for complex periodic Jacobi-type matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("direct", parents=[common], help="spectrum and localization checks of a matrix")
    p.add_argument("file")
    p.set_defaults(func=cmd_direct)

    p = sub.add_parser("inverse", parents=[common], help="feasibility and reconstruction from spectral data")
    p.add_argument("file")
    p.add_argument("--branch", type=int, default=0, help="selector of the branch to rebuild")
    p.add_argument("--all-branches", action="store_true", help="rebuild every branch")
    p.set_defaults(func=cmd_inverse)

    p = sub.add_parser("verify", parents=[common], help="check a matrix against spectral data")
    p.add_argument("matrix_file")
    p.add_argument("data_file")
    p.add_argument("--verify-tol", type=float, default=VERIFY_TOL)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("roundtrip", parents=[common], help="direct -> inverse -> match")
    p.add_argument("file", nargs="?")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("selftest", parents=[common], help="run the built-in worked fixtures")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.tol is not None and not args.tol > 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "count", 1) < 1:
        print("error: --count must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    start = time.perf_counter()
    try:
        report = args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SpecbandError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = render_text(report) if args.format == "text" else canonical_json(report.to_dict())
    sys.stdout.write(text)
    print(f"{report.command}: {report.status} in {time.perf_counter() - start:.3f}s", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
