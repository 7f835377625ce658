"""Command-line interface.

Exit codes: 0 success, 1 invalid input, 2 solver failure, 3 certificate
failure. Errors are also reported as a JSON document on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from bvp3eig import io
from bvp3eig.hypotheses import build_report
from bvp3eig.kernel import DiagonalError, green_d2k, green_dk, green_k
from bvp3eig.operator import MIN_ORDER, OperatorContext
from bvp3eig.problem import EXAMPLE_PROBLEM, ProblemError, ProblemSpec, parse_expr, parse_problem
from bvp3eig.problem.spec import check_delta
from bvp3eig.solver import SolverError, initial_guess, solve, sweep_rho
from bvp3eig.verify import certify

ORDER_ENV = "BVP3EIG_QUAD_ORDER"
EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_CERTIFICATE = 0, 1, 2, 3


class UsageError(Exception):
    def __init__(self, message: str, usage: str = ""):
        self.usage = usage
        super().__init__(message)


class Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so every failure maps to exit 1."""

    def error(self, message):
        raise UsageError(message, self.format_usage())


# -- argument types ---------------------------------------------------------


def positive_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (x > 0 and np.isfinite(x)):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return x


def int_at_least(lo: int):
    def parse(text: str) -> int:
        try:
            n = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if n < lo:
            raise argparse.ArgumentTypeError(f"must be at least {lo}: {n}")
        return n

    parse.__name__ = f"integer >= {lo}"
    return parse


def quad_order(text: str) -> int:
    n = int_at_least(MIN_ORDER)(text)
    if n > 512:
        raise argparse.ArgumentTypeError(f"quadrature order must be at most 512: {n}")
    return n


def rho_list(text: str) -> list[float]:
    try:
        values = [positive_float(x.strip()) for x in text.split(",") if x.strip()]
    except argparse.ArgumentTypeError as exc:
        raise argparse.ArgumentTypeError(f"bad rho list: {exc}") from None
    if not values:
        raise argparse.ArgumentTypeError("rho list is empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise argparse.ArgumentTypeError("rho list must be strictly increasing")
    return values


def sign_arg(text: str) -> int:
    if text in ("+", "+1", "1", "plus"):
        return 1
    if text in ("-", "-1", "minus"):
        return -1
    raise argparse.ArgumentTypeError(f"sign must be + or -: {text!r}")


def seed_profile(text: str) -> str:
    kind, _, k = text.partition(":")
    if kind not in ("sin", "cos") or not (k or "1").isdigit() or int(k or 1) < 1:
        raise argparse.ArgumentTypeError(f"seed profile must be sin:K or cos:K: {text!r}")
    return f"{kind}:{int(k or 1)}"


def default_order() -> int:
    text = os.environ.get(ORDER_ENV)
    if text is None:
        return 40
    try:
        return quad_order(text)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"{ORDER_ENV}: {exc}") from None


# -- parser -----------------------------------------------------------------


def build_parser() -> Parser:
    p = Parser(prog="bvp3eig", description="Eigenpairs of u''' + lam f(t, u, u', u'') = 0 with functional BCs.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    def common(sp, problem_required=True):
        sp.add_argument("--problem", type=Path, required=problem_required, help="problem file")
        sp.add_argument("--order", type=quad_order, default=None, help=f"Gauss nodes (default 40, or ${ORDER_ENV})")
        sp.add_argument("--fine-grid", type=int_at_least(201), default=1001, help="grid for norms and checks")
        sp.add_argument("--seed", type=int, default=0, help="random seed for sampling")
        sp.add_argument("--output-dir", type=Path, default=None, help="also write result files here")

    def solving(sp):
        sp.add_argument("--tol", type=positive_float, default=1e-10)
        sp.add_argument("--max-iter", type=int_at_least(1), default=500)
        sp.add_argument("--no-polish", action="store_true", help="skip the Newton polish")
        sp.add_argument("--seed-profile", type=seed_profile, default="sin:1", help="initial guess sin:K or cos:K")

    kt = sub.add_parser("kernel-table", help="CSV of k, dk/dt, d2k/dt2 on a uniform grid")
    kt.add_argument("--points", type=int_at_least(2), default=11, help="grid points per axis")
    kt.add_argument("--output-dir", type=Path, default=None)

    ch = sub.add_parser("check-hypotheses", help="evaluate the existence conditions at one radius")
    common(ch)
    ch.add_argument("--rho", type=positive_float, required=True)
    ch.add_argument("--mode", choices=("1a", "1b"), default=None)
    ch.add_argument("--samples", type=int_at_least(100), default=1000)
    ch.add_argument("--delta", default=None, help="declared lower bound of f, an expression in t")
    ch.add_argument("--eta1", type=float, default=None, help="declared lower bound of H1 on the sphere")
    ch.add_argument("--eta2", type=float, default=None, help="declared lower bound of H2 on the sphere")

    so = sub.add_parser("solve", help="one eigenpair on the sphere of radius rho")
    common(so)
    solving(so)
    so.add_argument("--rho", type=positive_float, required=True)
    so.add_argument("--sign", type=sign_arg, required=True)
    so.add_argument("--emit-samples", type=int_at_least(2), default=None, help="CSV with N samples (needs --output-dir)")

    sw = sub.add_parser("sweep-rho", help="both eigenpairs along a list of radii")
    common(sw)
    solving(sw)
    sw.add_argument("--rho-list", type=rho_list, required=True, help="comma-separated increasing radii")

    ve = sub.add_parser("verify", help="certify a stored eigenpair against the BVP")
    common(ve)
    ve.add_argument("--eigenpair", type=Path, required=True, help="eigenpair JSON from solve")

    ex = sub.add_parser("example", help="the built-in worked example end to end")
    common(ex, problem_required=False)
    solving(ex)
    ex.add_argument("--rho", type=positive_float, default=1.0)
    ex.add_argument("--samples", type=int_at_least(100), default=1000)
    ex.add_argument("--emit-samples", type=int_at_least(2), default=201)
    return p


# -- helpers ----------------------------------------------------------------


def load_problem(path: Path | None) -> tuple[ProblemSpec, str]:
    if path is None:
        return parse_problem(EXAMPLE_PROBLEM), EXAMPLE_PROBLEM
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read problem file: {exc}") from None
    return parse_problem(text), text


def emit(args, name: str, doc: dict) -> None:
    text = io.dumps(doc)
    sys.stdout.write(text)
    if args.output_dir is not None:
        args.output_dir.mkdir(parents=True, exist_ok=True)
        (args.output_dir / name).write_text(text)


def context(args, spec: ProblemSpec, order: int | None = None) -> OperatorContext:
    return OperatorContext.create(spec, order or args.order or default_order(), args.fine_grid)


def _solve(ctx, args, rho, sign):
    u0 = initial_guess(ctx, rho, args.seed_profile)
    return solve(ctx, rho, sign, u0, args.tol, args.max_iter, not args.no_polish)


# -- subcommands --------------------------------------------------------------


def cmd_kernel_table(args) -> int:
    grid = np.linspace(0.0, 1.0, args.points)
    rows = []
    for t in grid:
        for s in grid:
            try:
                d2k = repr(green_d2k(t, s) + 0.0)
            except DiagonalError:
                d2k = ""  # jumps across the diagonal
            rows.append([repr(float(t)), repr(float(s)), repr(green_k(t, s) + 0.0), repr(green_dk(t, s) + 0.0), d2k])
    header = ["t", "s", "k", "dk", "d2k"]
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    if args.output_dir is not None:
        args.output_dir.mkdir(parents=True, exist_ok=True)
        with open(args.output_dir / "kernel_table.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    return EXIT_OK


def cmd_check_hypotheses(args) -> int:
    spec, _ = load_problem(args.problem)
    overrides = {"eta1": args.eta1, "eta2": args.eta2}
    if args.delta is not None:
        delta = parse_expr(args.delta, variables=("t",))
        check_delta(delta)
        overrides["delta"] = delta
    spec = spec.with_overrides(**overrides)
    report = build_report(spec, args.rho, samples=args.samples, seed=args.seed, mode=args.mode)
    emit(args, "hypotheses.json", io.envelope("hypothesis-report", report.to_dict()))
    return EXIT_OK


def cmd_solve(args) -> int:
    if args.emit_samples is not None and args.output_dir is None:
        raise UsageError("--emit-samples needs --output-dir")
    spec, text = load_problem(args.problem)
    ctx = context(args, spec)
    pair = _solve(ctx, args, args.rho, args.sign)
    tag = "plus" if args.sign > 0 else "minus"
    emit(args, f"eigenpair_{tag}.json", io.envelope("eigenpair", io.eigenpair_to_dict(pair, text)))
    if args.emit_samples is not None:
        io.write_samples(args.output_dir / f"eigenpair_{tag}.csv", pair, args.emit_samples)
    return EXIT_OK


def cmd_sweep_rho(args) -> int:
    spec, _ = load_problem(args.problem)
    ctx = context(args, spec)
    table = sweep_rho(ctx, args.rho_list, args.tol, args.max_iter, not args.no_polish, args.seed_profile)
    emit(args, "branch_table.json", io.envelope("branch-table", io.branch_table_to_dict(table)))
    solved = any(p is not None for _, plus, minus in table.entries for p in (plus, minus))
    return EXIT_OK if solved else EXIT_SOLVER


def cmd_verify(args) -> int:
    spec, _ = load_problem(args.problem)
    try:
        doc = json.loads(args.eigenpair.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read eigenpair: {exc}") from None
    if not isinstance(doc, dict) or "order" not in doc:
        raise UsageError("eigenpair JSON has no 'order' field")
    try:
        ctx = context(args, spec, quad_order(str(doc["order"])))
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"eigenpair order: {exc}") from None
    pair = io.eigenpair_from_dict(doc, ctx)
    cert = certify(ctx, pair, args.fine_grid)
    body = {"eigenpair": io.eigenpair_summary(pair), "certificate": io.certificate_to_dict(cert)}
    emit(args, "certificate.json", io.envelope("certificate", body))
    return EXIT_OK if cert.passed else EXIT_CERTIFICATE


def example_bounds(rho: float) -> dict:
    """Lower bounds of the built-in example on the sphere of radius rho."""
    return {"eta1": 1.0 / (1.0 + rho**2), "eta2": -1.0 / 40.0}


def cmd_example(args) -> int:
    spec, text = load_problem(args.problem)
    if args.problem is None:
        spec = spec.with_overrides(**example_bounds(args.rho))
    report = build_report(spec, args.rho, samples=args.samples, seed=args.seed)
    ctx = context(args, spec)
    doc = {"rho": args.rho, "order": ctx.n, "hypotheses": report.to_dict(), "eigenpairs": {}, "certificates": {}}
    failures = []
    passed = True
    for sign, tag in ((1, "plus"), (-1, "minus")):
        try:
            pair = _solve(ctx, args, args.rho, sign)
        except SolverError as exc:
            failures.append({"sign": tag, "code": exc.code, "message": str(exc)})
            continue
        cert = certify(ctx, pair, args.fine_grid)
        passed &= cert.passed
        doc["eigenpairs"][tag] = io.eigenpair_summary(pair)
        doc["certificates"][tag] = io.certificate_to_dict(cert)
        if args.output_dir is not None:
            args.output_dir.mkdir(parents=True, exist_ok=True)
            (args.output_dir / f"eigenpair_{tag}.json").write_text(
                io.dumps(io.envelope("eigenpair", io.eigenpair_to_dict(pair, text)))
            )
            io.write_samples(args.output_dir / f"eigenpair_{tag}.csv", pair, args.emit_samples)
    doc["failures"] = failures
    emit(args, "example.json", io.envelope("example", doc))
    if failures:
        return EXIT_SOLVER
    return EXIT_OK if passed else EXIT_CERTIFICATE


COMMANDS = {
    "kernel-table": cmd_kernel_table,
    "check-hypotheses": cmd_check_hypotheses,
    "solve": cmd_solve,
    "sweep-rho": cmd_sweep_rho,
    "verify": cmd_verify,
    "example": cmd_example,
}


def _fail(exit_code: int, kind: str, message: str, **extra) -> int:
    doc = {"schema_version": io.SCHEMA_VERSION, "error": {"kind": kind, "message": message, **extra}}
    sys.stderr.write(json.dumps(doc) + "\n")
    return exit_code


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "order", None) is None and args.command != "kernel-table":
            args.order = default_order()
    except UsageError as exc:
        if exc.usage:
            sys.stderr.write(exc.usage)
        return _fail(EXIT_INPUT, "usage", str(exc))
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail(EXIT_INPUT, "usage", str(exc))
    except ProblemError as exc:
        return _fail(EXIT_INPUT, "problem", str(exc), line=exc.line, column=exc.column)
    except SolverError as exc:
        return _fail(EXIT_SOLVER, "solver", str(exc), code=exc.code)
    except (ValueError, ArithmeticError) as exc:
        return _fail(EXIT_INPUT, "input", str(exc))


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
