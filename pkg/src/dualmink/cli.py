"""``dualmink`` command-line interface.

Exit codes: 0 success, 1 usage, 2 bad input, 3 condition failure,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import logging
import os
import sys

import numpy as np

from . import io
from .body import BodyError, polygon_vertices
from .conditions import (
    ConditionError,
    check_classical,
    check_concentration,
    check_mass_inequality,
    equivalence_audit,
)
from .geometry import DimensionError
from .group import GroupError, IRREDUCIBLE_SEED, fixed_subspace, is_irreducible, orbit
from .john import JohnError, john_ellipsoid, john_sandwich_check
from .measure import MeasureError, is_G_invariant, symmetrize
from .quadrature import make_quadrature
from .solver import NumericalError, SolveResult, solve, solve_log_with_equality, verify

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_CONDITION, EXIT_NUMERICAL = 0, 1, 2, 3, 4

log = logging.getLogger("dualmink")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("DUALMINK_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as e:
        raise UsageError(f"DUALMINK_SEED must be an integer, got {env!r}") from e


def _quad(args, n):
    return make_quadrature(n, args.quad_nodes, args.quad_scheme, _seed(args))


def _emit(args, report: dict) -> None:
    if args.output:
        io.write_json(args.output, report)
    else:
        sys.stdout.write(io.dumps(report))


def _invariant_measure(args, mu, G):
    if mu.n != G.n:
        raise io.InputError(f"measure lives in R^{mu.n} but the group acts on R^{G.n}")
    if is_G_invariant(mu, G):
        return mu
    if getattr(args, "symmetrize", False):
        return symmetrize(mu, G)
    raise ConditionError("measure is not G-invariant (pass --symmetrize to average it)")


# --------------------------------------------------------------------------
# commands


def cmd_analyze_group(args) -> int:
    G = io.load_group(args.group)
    data = io.read_json(args.group)
    probes = [np.asarray(p, float) for p in data.get("probes", [])]
    probes += [np.array([float(x) for x in p.split(",")]) for p in args.probe or []]
    F = fixed_subspace(G)
    seed = args.irreducible_seed
    table = []
    for p in probes:
        if p.shape != (G.n,):
            raise io.InputError(f"probe {p.tolist()} is not a vector in R^{G.n}")
        orb = orbit(G, p)
        table.append({"probe": p.tolist(), "size": len(orb), "orbit": [v.tolist() for v in orb]})
    _emit(args, {
        "n": G.n,
        "order": G.order,
        "fixed_subspace": {"dim": F.dim, "basis": F.basis.T.tolist()},
        "irreducible": is_irreducible(G, seed=seed),
        "irreducible_seed": seed,
        "orbits": table,
    })
    return EXIT_OK


def cmd_check(args) -> int:
    mu = io.load_measure(args.measure)
    G = io.load_group(args.group)
    mu = _invariant_measure(args, mu, G)
    q = args.q
    if q is not None and q <= 0:
        raise UsageError("--q must be positive")
    mode = args.mode
    if mode == "auto":
        mode = "concentration" if q is None or abs(q - mu.n) < 1e-12 else "mass"
    if mode == "mass" and q is None:
        raise UsageError("the mass inequality needs --q")
    if args.classical:
        rep = check_classical(mu, "concentration" if mode == "concentration" else "mass_inequality",
                              q=q, strict_tol=args.strict_tol, eq_tol=args.eq_tol)
    elif mode == "concentration":
        rep = check_concentration(mu, G, args.eq_tol)
    else:
        rep = check_mass_inequality(mu, G, q, args.strict_tol)
    _emit(args, rep.to_dict())
    return EXIT_OK if rep.satisfied else EXIT_CONDITION


def _write_csv(path, header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(float(x), ".17g") for x in r])
    io.write_text(path, buf.getvalue())


def _emit_plot(prefix, R: SolveResult):
    _write_csv(f"{prefix}_trace.csv", ["iteration", "phi"], enumerate(R.phi_trace))
    if R.body.n == 2:
        P = polygon_vertices(R.solution)
        _write_csv(f"{prefix}_outline.csv", ["x", "y"], np.vstack([P, P[:1]]))


def cmd_solve(args) -> int:
    mu = io.load_measure(args.measure)
    G = io.load_group(args.group)
    mu = _invariant_measure(args, mu, G)
    base = io.read_json(args.config) if args.config else {}
    overrides = {"q": args.q, "max_iters": args.max_iters, "grad_tol": args.grad_tol,
                 "seed": _seed(args)}
    if args.no_check:
        overrides["check_conditions"] = False
    if "q" not in base and args.q is None:
        raise UsageError("solve needs --q or a config with q")
    cfg = io.config_from_dict(base, **overrides)
    if args.quad_scheme or args.quad_nodes:
        extra = {"scheme": args.quad_scheme, "nodes": args.quad_nodes}
        cfg.quad = {**cfg.quad, **{k: v for k, v in extra.items() if v is not None}}
    Q = cfg.quadrature(mu.n)
    if args.split_equality and abs(cfg.q - mu.n) < 1e-12:
        R = solve_log_with_equality(mu, G, cfg, Q)
    else:
        R = solve(mu, G, cfg, Q)
    out = R.to_dict()
    out["config"] = cfg.to_dict()
    out["solution"] = io.body_to_dict(R.solution)
    _emit(args, out)
    if args.emit_plot:
        _emit_plot(args.emit_plot, R)
    return EXIT_OK if R.converged else EXIT_NUMERICAL


def cmd_verify(args) -> int:
    mu = io.load_measure(args.measure)
    B, scale = io.load_body(args.body)
    if B.n != mu.n:
        raise io.InputError("body and measure live in different dimensions")
    R = SolveResult(B, scale, float("nan"), 0, False, [])
    res = verify(mu, R, args.q, _quad(args, B.n))
    ok = res < args.tol
    _emit(args, {"residual_tv": res, "tolerance": args.tol, "passed": ok, "q": args.q})
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_john(args) -> int:
    B, _ = io.load_body(args.body)
    G = io.load_group(args.group) if args.group else None
    E = john_ellipsoid(B, G, block_tol=args.block_tol)
    _emit(args, {
        "n": E.n,
        "semi_axes": E.semi_axes.tolist(),
        "dims": E.dims,
        "blocks": [{"semi_axis": b, "basis": V.basis.T.tolist()} for V, b in E.blocks],
        "sandwich": john_sandwich_check(B, E),
        "diagnostics": E.diagnostics,
    })
    return EXIT_OK


def cmd_audit(args) -> int:
    if args.corpus:
        from .samplers import regression_corpus

        cases = regression_corpus(_seed(args) or 20240611)
    else:
        if not (args.measure and args.group):
            raise UsageError("audit needs MEASURE and GROUP, or --corpus")
        G = io.load_group(args.group)
        mu = _invariant_measure(args, io.load_measure(args.measure), G)
        cases = [(args.measure, mu, G)]
    rows, holds = [], True
    for name, mu, G in cases:
        a = equivalence_audit(mu, G)
        holds &= a.implication_holds
        row = {"name": str(name), **a.to_dict()} if not args.corpus else {
            "name": name, "consistent": a.consistent, "implication_holds": a.implication_holds,
            "g_satisfied": a.g_report.satisfied, "classical_satisfied": a.classical_report.satisfied}
        rows.append(row)
    _emit(args, {"instances": len(rows), "implication_holds": holds, "results": rows})
    return EXIT_OK if holds else EXIT_CONDITION


def cmd_selftest(args) -> int:
    from .acceptance import run_all

    only = {int(x) for x in args.only.split(",")} if args.only else None
    results = run_all(only, echo=lambda s: print(s, file=sys.stderr))
    if args.output:
        io.write_json(args.output, {"results": [r.to_dict() for r in results],
                                    "passed": all(r.passed for r in results)})
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-o", "--output", help="write the JSON report here (default: stdout)")
    common.add_argument("--seed", type=int, help="random seed (fallback: $DUALMINK_SEED, then 0)")
    common.add_argument("--quad-scheme", choices=["grid", "fibonacci", "fibonacci-rotated", "montecarlo"])
    common.add_argument("--quad-nodes", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="dualmink", description="G-invariant dual Minkowski problem toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("analyze-group", parents=[common], help="order, fixed space, irreducibility")
    s.add_argument("group")
    s.add_argument("--probe", action="append", help="comma-separated vector; repeatable")
    s.add_argument("--irreducible-seed", type=int, default=IRREDUCIBLE_SEED)
    s.set_defaults(func=cmd_analyze_group)

    s = sub.add_parser("check", parents=[common], help="subspace mass / concentration conditions")
    s.add_argument("measure")
    s.add_argument("group")
    s.add_argument("--q", type=float)
    s.add_argument("--mode", choices=["auto", "mass", "concentration"], default="auto")
    s.add_argument("--classical", action="store_true", help="test every subspace, not only invariant ones")
    s.add_argument("--symmetrize", action="store_true")
    s.add_argument("--strict-tol", type=float, default=0.0)
    s.add_argument("--eq-tol", type=float, default=1e-9)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("solve", parents=[common], help="solve for a body with the given measure")
    s.add_argument("measure")
    s.add_argument("group")
    s.add_argument("--q", type=float)
    s.add_argument("--config")
    s.add_argument("--max-iters", type=int)
    s.add_argument("--grad-tol", type=float)
    s.add_argument("--no-check", action="store_true", help="skip the existence-condition check")
    s.add_argument("--split-equality", action="store_true",
                   help="for q = n, split along equality subspaces when present")
    s.add_argument("--symmetrize", action="store_true")
    s.add_argument("--emit-plot", metavar="PREFIX", help="write PREFIX_trace.csv (and PREFIX_outline.csv in 2-D)")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("verify", parents=[common], help="residual of a body against a measure")
    s.add_argument("measure")
    s.add_argument("body", help="body JSON or a solve result")
    s.add_argument("--q", type=float, required=True)
    s.add_argument("--tol", type=float, default=1e-3)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("john", parents=[common], help="John ellipsoid and its blocks")
    s.add_argument("body")
    s.add_argument("--group")
    s.add_argument("--block-tol", type=float, default=1e-7)
    s.set_defaults(func=cmd_john)

    s = sub.add_parser("audit", parents=[common], help="G-invariant vs classical concentration")
    s.add_argument("measure", nargs="?")
    s.add_argument("group", nargs="?")
    s.add_argument("--corpus", action="store_true", help="run the built-in regression corpus")
    s.add_argument("--symmetrize", action="store_true")
    s.set_defaults(func=cmd_audit)

    s = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    s.add_argument("--only", help="comma-separated criterion numbers")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"dualmink: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ConditionError as e:
        print(f"dualmink: condition failure: {e}", file=sys.stderr)
        if e.report is not None:
            _emit(args, {"error": str(e), "report": e.report.to_dict()})
        return EXIT_CONDITION
    except (io.InputError, GroupError, MeasureError, BodyError, DimensionError) as e:
        print(f"dualmink: input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, JohnError, ArithmeticError, np.linalg.LinAlgError) as e:
        print(f"dualmink: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as e:
        print(f"dualmink: input error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
