"""Command line: ``extremal-dare solve|check|verify``.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 convergence
failure, 4 acceptance failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .builtin import EXAMPLES, builtin_example
from .driver import METHODS, NAMES, solve_all
from .errors import DareError, ParseError, UnknownExample, ValidationError
from .io import load_feedback, load_problem, summary_dict, write_history_csv
from .iterations import IterationOptions
from .structure import analyze

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_CONVERGENCE, EXIT_ACCEPTANCE = range(5)
DEFAULT_TOL = 1e-14
TARGETS = {"all": ("psd", "nsd"), "psd": ("psd",), "nsd": ("nsd",)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="extremal-dare",
                 description="Extremal Hermitian solutions of the discrete-time algebraic Riccati equation.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="compute the extremal solutions")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--problem", metavar="FILE", help="problem JSON file")
    src.add_argument("--example", metavar="ID", help=f"built-in example ({', '.join(EXAMPLES)})")
    s.add_argument("--eps", type=float, default=0.0, help="epsilon for ex3 (default 0)")
    s.add_argument("--method", choices=METHODS, default="afpi")
    s.add_argument("--r", type=int, default=2, help="AFPI order r >= 2 (default 2)")
    s.add_argument("--target", choices=tuple(TARGETS), default="all")
    s.add_argument("--tol", type=float, default=None,
                   help=f"NRes tolerance (default: the example's, else {DEFAULT_TOL:g})")
    s.add_argument("--max-iter", type=int, default=200)
    s.add_argument("--feedback", metavar="FILE", help='JSON with "F" and/or "F_dual"')
    s.add_argument("--history", metavar="OUT.csv",
                   help="convergence history; extra runs go to OUT_<run>.csv")
    s.add_argument("--json", metavar="OUT.json", help="summary report")
    s.add_argument("--plot", metavar="OUT.png", help="semilog NRes plot of every run")

    c = sub.add_parser("check", help="structure report only")
    c.add_argument("--problem", metavar="FILE", required=True)

    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--suite", choices=("paper",), required=True)
    return ap


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ValidationError(exc.strerror or str(exc), path) from exc


def _fmt(v):
    return "" if v is None or not np.isfinite(v) else f"{v:.3e}"


def _matrix_lines(x) -> list[str]:
    with np.printoptions(precision=10, suppress=True, linewidth=120):
        return ["    " + line for line in str(np.real_if_close(x)).splitlines()]


def _print_summary(sol, out):
    print(f"{'solution':<8} {'nres':>10} {'rho(T)':>10} {'mu(T)':>10} {'iters':>6}  route / termination",
          file=out)
    for name in NAMES:
        d = sol.diagnostics.get(name)
        x = getattr(sol, name)
        if x is not None and d is not None:
            print(f"{name:<8} {_fmt(d.nres):>10} {_fmt(d.rho_t):>10} {_fmt(d.mu_t):>10} "
                  f"{d.iterations:>6}  {d.route} / {d.termination}", file=out)
        else:
            print(f"{name:<8} skipped: {sol.skipped.get(name, 'not computed')}", file=out)
    for name, x in sol.solutions().items():
        print(f"{name} =", file=out)
        print("\n".join(_matrix_lines(x)), file=out)
    if sol.route_agreement is not None:
        print(f"route A / route B agreement: {sol.route_agreement:.3e}", file=out)
    print(f"wall time: {sol.wall_ms:.1f} ms", file=out)


def _write_histories(sol, path):
    reports = dict(sol.reports)
    if not reports:
        return
    main = "primal" if "primal" in reports else next(iter(reports))
    write_history_csv(reports.pop(main), path)
    stem, ext = os.path.splitext(path)
    for key, rep in reports.items():
        write_history_csv(rep, f"{stem}_{key}{ext or '.csv'}")


def _solve(args, out) -> int:
    if args.r < 2:
        raise UsageError("--r must be at least 2")
    if args.max_iter < 1:
        raise UsageError("--max-iter must be positive")
    feedback = dual_feedback = c = None
    tol = args.tol
    if args.example:
        try:
            ex = builtin_example(args.example, eps=args.eps)
        except UnknownExample as exc:
            raise UsageError(f"unknown example {args.example!r}; choose from {', '.join(EXAMPLES)}") from exc
        p, c = ex.problem, ex.c
        feedback, dual_feedback = ex.feedback, ex.dual_feedback
        tol = ex.tol if tol is None else tol
    else:
        p, c = load_problem(_read(args.problem))
    if args.feedback:
        f, fd = load_feedback(_read(args.feedback))
        feedback = f if f is not None else feedback
        dual_feedback = fd if fd is not None else dual_feedback
    tol = DEFAULT_TOL if tol is None else tol
    try:
        opts = IterationOptions(tol=tol, max_iter=args.max_iter)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    sol = solve_all(p, args.r, opts, feedback, dual_feedback=dual_feedback, c=c,
                    method=args.method, targets=TARGETS[args.target])
    _print_summary(sol, out)
    if args.history:
        _write_histories(sol, args.history)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(summary_dict(sol), fh, indent=1)
    if args.plot:
        from .plotting import plot_convergence
        plot_convergence(sol.reports, args.plot, title=p.name)
    if sol.failed:
        print(f"convergence failure: {', '.join(sorted(sol.failed))}", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


def _check(args, out) -> int:
    p, c = load_problem(_read(args.problem))
    print(json.dumps(analyze(p, c).as_dict(), indent=1), file=out)
    return EXIT_OK


def _verify(args, out) -> int:
    from .acceptance import run_suite
    results = run_suite(out=lambda line: print(line, file=out, flush=True))
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed", file=out)
    return EXIT_ACCEPTANCE if failed else EXIT_OK


def run_cli(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        handler = {"solve": _solve, "check": _check, "verify": _verify}[args.command]
        return handler(args, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ValidationError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DareError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
