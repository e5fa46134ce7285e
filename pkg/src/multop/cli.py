"""Command-line entry point: ``multop {analyze,evolve,verify,laplace}``.

Exit codes: 0 success, 1 verification failure, 2 config error,
3 numeric failure, 4 generation failure (evolve without --force).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import operator as op
from . import semigroup as sg
from . import verify
from .config import ConfigError, ProblemConfig, load_config
from .matrix import MatrixError
from .pointset import PointSet
from .quadrature import QuadratureError
from .symbol import NonFiniteSymbolError

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC, EXIT_GENERATION = 0, 1, 2, 3, 4


class NumericFailure(Exception):
    pass


# ---------------------------------------------------------------------------
# serialization

def num(x):
    if x is None:
        return "not-applicable"
    x = float(x)
    if math.isnan(x):
        return "undetermined"
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return x


def cnum(z) -> dict:
    z = complex(z)
    return {"re": num(z.real), "im": num(z.imag)}


def flag(b):
    if b is None:
        return "undetermined"
    return bool(b)


def pointset_json(ps: PointSet) -> dict:
    out = {
        "points": [cnum(z) for z in ps.points],
        "limit_points": [cnum(z) for z in ps.limit_points],
        "bounded": flag(ps.bounded),
    }
    if ps.note:
        out["note"] = ps.note
    return out


def report_json(rep: op.OperatorReport, cfg: ProblemConfig) -> dict:
    na = "not-applicable"
    return {
        "norm": cfg.norm.to_json(),
        "dimension": cfg.symbol.dim,
        "atoms": cfg.space.n_atoms,
        "mode": cfg.space.mode,
        "operator_norm": num(rep.operator_norm),
        "bounded": rep.bounded,
        "spectrum": pointset_json(rep.spectrum),
        "essential_range": pointset_json(rep.essential_range) if rep.essential_range is not None else na,
        "invertible": rep.invertible,
        "delta_invertibility": num(rep.delta_invertibility),
        "closed_range": na if rep.closed_range is None else rep.closed_range,
        "delta_closed_range": na if rep.delta_closed_range is None else num(rep.delta_closed_range),
        "compact": flag(rep.compact),
        "fredholm": na if rep.fredholm is None else rep.fredholm,
        "notes": list(rep.notes),
    }


def dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands

def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    tol = args.tol if args.tol is not None else cfg.task.tol
    cfg.symbol.values()  # surface non-finite atoms before any analysis
    rep = op.analyze(cfg.symbol, cfg.norm, tol, rng=np.random.default_rng(args.seed))
    if args.inject_fault == "norm":
        rep.operator_norm = float(np.abs(cfg.symbol.values()).sum(axis=1).max())
    emit(dump(report_json(rep, cfg)), args.out)
    return EXIT_OK


def cmd_evolve(args) -> int:
    cfg = load_config(args.config)
    u = cfg.symbol
    x = cfg.initial_function()
    gen = sg.generation_check(u)
    if not gen.generates and not args.force:
        print(f"error: symbol does not generate a C0 semigroup ({gen.note}); use --force to evolve anyway",
              file=sys.stderr)
        return EXIT_GENERATION
    if u.space.mode == "sequence":
        print("note: evolving the materialized atoms only", file=sys.stderr)
    traj = sg.solve_acp(u, x, cfg.task.t_grid)
    if not np.all(np.isfinite(traj.values)):
        raise NumericFailure("trajectory overflowed to non-finite values")
    stab = sg.stability_bound(u, cfg.norm, t_grid=cfg.task.t_grid, rng=np.random.default_rng(args.seed))
    integ = sg.integrated_semigroup_check(u)
    summary = {
        "generates_c0": gen.generates,
        "c": num(gen.c),
        "generation_note": gen.note,
        "spectral_bound_ess": num(stab.w_star),
        "fitted_M": num(stab.fitted_m),
        "epsilon": stab.eps,
        "integrated_generator": integ.generator,
        "w": num(integ.w),
        "m": cfg.task.m if cfg.task.m is not None else 2 * u.dim + 1,
    }
    emit(traj.to_csv(), args.out)
    text = dump(summary)
    if args.summary:
        emit(text, args.summary)
    else:
        sys.stderr.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite is not None:
        if args.suite != "builtin":
            raise ConfigError("--suite", f"unknown suite {args.suite!r} (available: builtin)")
        results = verify.run_builtin(args.seed, args.inject_fault)
    elif args.config is not None:
        cfg = load_config(args.config)
        results = verify.run_for_symbol(cfg.symbol, cfg.norm, args.seed, cfg.task.trials, args.inject_fault)
    else:
        raise ConfigError("--config", "verify needs --config or --suite")
    rep = verify.report(results)
    emit(dump(rep), args.out)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}", file=sys.stderr)
    return EXIT_OK if rep["passed"] else EXIT_VERIFY


def cmd_laplace(args) -> int:
    cfg = load_config(args.config)
    u = cfg.symbol
    m = cfg.task.m if cfg.task.m is not None else 2 * u.dim + 1
    lam = cfg.task.lam
    if lam is None:
        lam = sg.spectral_abscissa(u) + 3
    try:
        res = sg.laplace_identity_check(u, lam, m, rng=np.random.default_rng(args.seed))
    except ValueError as exc:
        raise ConfigError("task.lambda", str(exc)) from None
    tol = args.tol if args.tol is not None else 1e-4
    out = {
        "lambda": cnum(res.lam),
        "m": res.m,
        "t_max": num(res.t_max),
        "spectral_bound_ess": num(res.w_star),
        "relative_error": num(res.relative_error),
        "tolerance": tol,
        "passed": res.relative_error <= tol,
    }
    emit(dump(out), args.out)
    return EXIT_OK if out["passed"] else EXIT_VERIFY


COMMANDS = {"analyze": cmd_analyze, "evolve": cmd_evolve, "verify": cmd_verify, "laplace": cmd_laplace}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON problem config")
    common.add_argument("--out", metavar="PATH", help="write the main output here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for all randomized probes (default 0)")
    common.add_argument("--tol", type=float, help="decision tolerance (default from config)")
    common.add_argument("--force", action="store_true", help="evolve even if generation fails")
    common.add_argument("--suite", metavar="NAME", help="named verification suite (builtin)")
    common.add_argument("--summary", metavar="PATH", help="evolve: write the JSON summary here (default stderr)")
    common.add_argument("--inject-fault", choices=verify.FAULTS, help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="multop", description="Matrix multiplication operators on function spaces.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="operator report (norm, spectrum, invertibility, ...)")
    sub.add_parser("evolve", parents=[common], help="solve v' = u v; CSV trajectory plus JSON summary")
    sub.add_parser("verify", parents=[common], help="run the invariant suite")
    sub.add_parser("laplace", parents=[common], help="check the resolvent Laplace identity")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "verify" and args.config is None:
        parser.error("--config is required")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonFiniteSymbolError as exc:
        print(f"error: {exc} (atom_index={exc.atom_index})", file=sys.stderr)
        return EXIT_NUMERIC
    except (NumericFailure, MatrixError, QuadratureError, op.MissingEnvelopeError) as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
