"""Command-line front end: ``majorant {solve,verify,sidon,sample,norm}``.

Exit codes: 0 success, 1 bad input or I/O, 2 a verification check failed,
3 a solver did not converge under ``--strict``.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import os
import sys
import warnings
from dataclasses import asdict

from . import io
from .dual import EmptyInput, ScalingMismatch, kkt_report
from .primal import cross_validate
from .spectral import (
    ExponentPair,
    NonConvergence,
    QuadratureConfig,
    grid_points,
    norm_even,
    norm_p,
    power_product,
)
from .sumsets import EnumerationBudgetExceeded, FrequencySet, is_bj_set
from .verify import (
    DEFAULT_TOL,
    PreconditionViolated,
    VerificationReport,
    check_dual_norm_inequality,
    verify_conjugate,
)

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_NONCONVERGED = 0, 1, 2, 3
SEED_ENV = "MAJORANT_SEED"
DEFAULT_POINTS = 512
CROSS_TOL = 1e-5
KKT_TOL = 1e-5


class UsageError(Exception):
    pass


def _env_seed() -> int | None:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}: expected an integer, got {raw!r}") from None


def _resolve_seed(args) -> int | None:
    """Seed precedence: ``--seed`` flag, then the environment, then the file."""
    if args.seed is not None:
        return args.seed
    return _env_seed()


def _emit(text: str, out: str | None) -> None:
    if out:
        io.write_text(out, text)
    else:
        sys.stdout.write(text)


def _tool() -> dict:
    return {"name": io.TOOL_NAME, "version": io.TOOL_VERSION}


def _checks_json(rep: VerificationReport) -> list[dict]:
    return [{"name": c.name, "passed": c.passed, "residual": c.residual, "anchor": c.anchor} for c in rep.checks]


def _load_problem(args, min_j: int = 2) -> io.ProblemFile:
    raw = io.read_json(args.input)
    if isinstance(raw, dict) and getattr(args, "j", None) is not None:
        raw = {**raw, "j": args.j}
    return io.parse_problem(raw, min_j=min_j)


# --- solve ----------------------------------------------------------------------


def cmd_solve(args) -> int:
    prob = _load_problem(args)
    j, f = prob.j, prob.f
    mode = args.mode or prob.options.get("mode", "full")
    strict = args.strict or prob.options.get("strict", False)
    out = args.out or prob.options.get("out")
    scfg = prob.solver_config(tol_gap=args.tol_gap, seed=_resolve_seed(args))
    qcfg = prob.quadrature_config(base_grid=args.grid)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonConvergence)
        try:
            cv = cross_validate(f, j, scfg, qcfg, tol=CROSS_TOL, check=False)
        except ScalingMismatch as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VERIFY
    quad_warnings = sorted({str(w.message) for w in caught if issubclass(w.category, NonConvergence)})

    sol, conj = cv.solution, cv.dual
    primal = cv.full if mode == "full" else cv.partial
    rep = verify_conjugate(f, conj.G, j)
    rep.add(
        "cross_validation",
        cv.agree,
        cv.max_discrepancy,
        "dual and primal routes give the same majorant",
    )
    kkt = kkt_report(f, conj, j)
    kkt_violation = max(-kkt["nonnegativity"], -kkt["majorization"], kkt["complementary_slackness"], kkt["support_leakage"])
    rep.add("kkt_residuals", kkt_violation <= KKT_TOL, kkt_violation, "optimality conditions of the dual solution")
    identity = abs(conj.norm_F_p * sol.K - 1.0)
    rep.add("norm_times_constant", identity <= 1e-6, identity, "the minimal norm is the reciprocal of the dual constant")

    converged = {
        "dual": sol.converged,
        "primal_full": cv.full.converged,
        "primal_partial": cv.partial.converged,
        "quadrature": not quad_warnings,
    }
    nonconverged = [k for k, ok in converged.items() if not ok]
    if nonconverged:
        status = "nonconverged"
    else:
        status = "pass" if rep.passed else "fail"

    p = ExponentPair.special(j).p
    report = {
        "tool": _tool(),
        "command": "solve",
        "input": prob.to_json(),
        "config": {
            "j": j,
            "mode": mode,
            "strict": strict,
            "solver": asdict(scfg),
            "quadrature": asdict(qcfg),
        },
        "p": f"{p.numerator}/{p.denominator}",
        "K": sol.K,
        "G": io.coefficient_records(conj.G),
        "F": io.coefficient_records(conj.F),
        "norms": {
            "f_p": norm_p(f, float(p), qcfg),
            "F_p": conj.norm_F_p,
            "G_2j": conj.norm_G_2j,
        },
        "checks": _checks_json(rep),
        "diagnostics": {
            "dual": {"iterations": sol.iterations, "gap": sol.gap, "converged": sol.converged},
            "primal": {
                "mode": mode,
                "iterations": primal.iterations,
                "kkt_residual": primal.kkt_residual,
                "converged": primal.converged,
                "norm_p": primal.norm_p,
                "F": io.coefficient_records(primal.F),
            },
            "cross_validation": dict(cv.discrepancies),
            "kkt": kkt,
            "nonconverged": nonconverged,
            "quadrature_warnings": quad_warnings,
        },
        "status": status,
    }
    _emit(io.dumps(report), out)
    for line in rep.lines():
        print(line, file=sys.stderr)
    if nonconverged:
        print(f"warning: no convergence in {', '.join(nonconverged)}", file=sys.stderr)
        if strict:
            return EXIT_NONCONVERGED
    return EXIT_OK if rep.passed else EXIT_VERIFY


# --- verify ----------------------------------------------------------------------


def cmd_verify(args) -> int:
    raw = io.read_json(args.input)
    if isinstance(raw, dict) and args.j is not None:
        raw = {**raw, "j": args.j}
    vin = io.parse_verify(raw)
    tol = args.tol if args.tol is not None else (vin.tol if vin.tol is not None else DEFAULT_TOL)
    qcfg = QuadratureConfig(base_grid=args.grid)
    rep = verify_conjugate(vin.f, vin.H, vin.j, tol)
    notes = []
    if vin.F is not None:
        diff = vin.F.max_abs_diff(power_product(vin.H, vin.j))
        rep.add("F_matches_H", diff <= tol, diff, "F is the power product of H")
    try:
        ok, margin = check_dual_norm_inequality(vin.H, vin.f, vin.j, qcfg)
        rep.add("dual_norm_inequality", ok, margin, "f is at least as large in norm as the power product of H")
    except PreconditionViolated as exc:
        notes.append(f"dual norm inequality not applicable: {exc}")

    report = {
        "tool": _tool(),
        "command": "verify",
        "input": {
            "j": vin.j,
            "f": io.coefficient_records(vin.f),
            "H": io.coefficient_records(vin.H),
        },
        "config": {"j": vin.j, "tol": tol, "quadrature": asdict(qcfg)},
        "checks": _checks_json(rep),
        "diagnostics": {"notes": notes},
        "status": "pass" if rep.passed else "fail",
    }
    if vin.F is not None:
        report["input"]["F"] = io.coefficient_records(vin.F)
    _emit(io.dumps(report), args.out)
    for line in rep.lines():
        print(line, file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_VERIFY


# --- sidon -----------------------------------------------------------------------


def cmd_sidon(args) -> int:
    try:
        S = FrequencySet.parse(args.set)
    except ValueError as exc:
        raise UsageError(f"set: {exc}") from None
    j = args.j if args.j is not None else 2
    if j < 1:
        raise UsageError(f"j: must be >= 1, got {j}")
    try:
        ok, witness = is_bj_set(S, j)
    except EnumerationBudgetExceeded as exc:
        raise UsageError(str(exc)) from None
    text = "true\n" if ok else f"false\n{witness}\n"
    _emit(text, args.out)
    return EXIT_OK


# --- sample ----------------------------------------------------------------------


def cmd_sample(args) -> int:
    raw = io.read_json(args.input)
    if io.is_report(raw):
        F = io.report_majorant(raw)
        default_points = DEFAULT_POINTS
    else:
        prob = io.parse_problem(raw, min_j=1)
        F = prob.f
        default_points = prob.options.get("points", DEFAULT_POINTS)
    N = args.points if args.points is not None else default_points
    if N <= 0:
        raise UsageError(f"points: must be positive, got {N}")
    theta = grid_points(N)
    vals = F.evaluate(theta)
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "re", "im", "abs"])
    for t, v in zip(theta, vals):
        w.writerow([io.format_float(float(x)) for x in (t, v.real, v.imag, abs(v))])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


# --- norm ------------------------------------------------------------------------


def cmd_norm(args) -> int:
    prob = _load_problem(args, min_j=1)
    f, j = prob.f, prob.j
    qcfg = prob.quadrature_config(base_grid=args.grid)
    pair = ExponentPair(j)
    p = pair.p
    report = {
        "tool": _tool(),
        "command": "norm",
        "input": prob.to_json(),
        "config": {"j": j, "quadrature": asdict(qcfg)},
        "p": f"{p.numerator}/{p.denominator}",
        "norms": {
            "f_p": norm_p(f, float(p), qcfg),
            "f_2j_exact": norm_even(f, j),
            "f_2j_quadrature": norm_p(f, float(pair.p_conj), qcfg),
        },
    }
    _emit(io.dumps(report), args.out or prob.options.get("out"))
    return EXIT_OK


# --- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="majorant", description="Minimal majorants at special exponents p = 2j/(2j-1).")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, grid=True, j_help="order j (overrides the file)"):
        sp.add_argument("--j", type=int, default=None, help=j_help)
        sp.add_argument("--out", default=None, help="write output here instead of stdout")
        if grid:
            sp.add_argument("--grid", type=int, default=None, help="base quadrature grid size")

    sp = sub.add_parser("solve", help="compute the minimal majorant and verify it")
    sp.add_argument("input")
    common(sp)
    sp.add_argument("--mode", choices=("partial", "full"), default=None, help="primal mode reported in diagnostics")
    sp.add_argument("--strict", action="store_true", default=False, help="exit 3 if any solver fails to converge")
    sp.add_argument("--tol-gap", type=float, default=None, help="relative Frank-Wolfe gap tolerance")
    sp.add_argument("--seed", type=int, default=None, help=f"solver seed (overrides {SEED_ENV} and the file)")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("verify", help="check a candidate conjugate H against f")
    sp.add_argument("input")
    common(sp)
    sp.add_argument("--tol", type=float, default=None, help=f"check tolerance (default {DEFAULT_TOL})")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sidon", help="test whether a set is a B_j set")
    sp.add_argument("set", help='comma-separated integers, e.g. "0,1,3"')
    common(sp, grid=False, j_help="order j (default 2)")
    sp.set_defaults(func=cmd_sidon)

    sp = sub.add_parser("sample", help="sample f (problem file) or F (report) on a uniform grid as CSV")
    sp.add_argument("input")
    sp.add_argument("--points", type=int, default=None, help=f"number of points (default {DEFAULT_POINTS})")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("norm", help="Lp and L2j norms of the input")
    sp.add_argument("input")
    common(sp)
    sp.set_defaults(func=cmd_norm)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (io.SchemaError, UsageError, EmptyInput) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
