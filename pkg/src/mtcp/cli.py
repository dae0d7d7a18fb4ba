"""Command-line interface: ``mtcp {gen,solve,bench,verify}``.

Exit codes: 0 success, 1 error (I/O, bad file, solver error, failed
verification), 2 usage, 3 iteration cap reached, 4 memory budget exceeded.
Data goes to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import sys

from . import bench as bench_mod
from .formats import FormatError, dumps_vector, load_problem, load_vector, save_problem
from .linalg import m_matrix_certificate
from .problems import GeneratorSpec, generate, strong_m_certificate
from .solver import CONVERGED, ITERATION_CAP, SolverConfig, solve, verify_solution

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_CAP, EXIT_BUDGET = 0, 1, 2, 3, 4

ALG_NAMES = {"ldleqa": "ld_leqa", "ldanewton": "ld_a_newton"}


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _alpha(text):
    v = float(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1], got {v}")
    return v


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {v}")
    return v


def _int_list(text):
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list of integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError(f"dimensions must be >= 1, got {text!r}")
    return vals


def parse_alphas(text: str) -> list[float]:
    """``0.1,0.5,1`` or ``start:stop:step`` (stop included)."""
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            if step <= 0:
                raise ValueError
            count = int(round((stop - start) / step))
            vals = [round(start + i * step, 12) for i in range(count + 1)]
        else:
            vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad alpha list {text!r}") from None
    if not vals or any(not 0 < v <= 1 for v in vals):
        raise argparse.ArgumentTypeError(f"alphas must lie in (0, 1], got {text!r}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtcp", description="M-tensor complementarity problems: generate, solve, benchmark"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a seeded test problem (.mtcp)")
    g.add_argument("--problem", type=int, choices=(1, 2, 3), required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=_positive_int, required=True)
    g.add_argument("--seed", type=_seed, required=True)
    g.add_argument("--eps", type=float, default=0.01)
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="solve a .mtcp problem")
    s.add_argument("input")
    s.add_argument("--alg", choices=sorted(ALG_NAMES), default="ldleqa")
    s.add_argument("--alpha", type=_alpha, default=1.0)
    s.add_argument("--eta", type=float, default=1e-8)
    s.add_argument("--max-iter", type=_positive_int, default=1000)
    s.add_argument("--init", choices=("zero", "lower_dim_equation"), default="zero")
    s.add_argument("--trace", action="store_true", help="also print one line per iteration")
    s.add_argument("--x-out", help="write the final iterate, one value per line")

    b = sub.add_parser("bench", help="averaged trial sweep, written as CSV")
    b.add_argument("--problem", type=int, choices=(1, 2, 3), required=True)
    b.add_argument("--m", type=int, required=True)
    b.add_argument("--n", type=_int_list, required=True)
    b.add_argument("--alphas", type=parse_alphas, required=True)
    b.add_argument("--trials", type=_positive_int, default=100)
    b.add_argument("--seed", type=_seed, default=0)
    b.add_argument("--alg", choices=sorted(ALG_NAMES), action="append")
    b.add_argument("--eta", type=float, default=1e-8)
    b.add_argument("--max-iter", type=_positive_int, default=1000)
    b.add_argument("--jobs", type=_positive_int, default=1)
    b.add_argument("--csv", required=True, help="output path, or - for stdout")
    b.add_argument("--trace-jsonl", help="write per-trial records as JSON lines")

    v = sub.add_parser("verify", help="check a problem's certificates and a candidate solution")
    v.add_argument("input")
    v.add_argument("--solution", help="vector file to verify (defaults to the stored witness)")
    v.add_argument("--tol", type=float, default=1e-8)
    return parser


def _err(msg: str) -> None:
    print(f"mtcp: {msg}", file=sys.stderr)


def cmd_gen(args) -> int:
    if args.m < 2:
        _err(f"--m must be >= 2, got {args.m}")
        return EXIT_USAGE
    try:
        bench_mod.check_budget(args.m, args.n)
    except bench_mod.MemoryBudgetError as exc:
        _err(str(exc))
        return EXIT_BUDGET
    spec = GeneratorSpec(f"P{args.problem}", args.m, args.n, args.seed, args.eps)
    p = generate(spec)
    try:
        save_problem(args.out, p)
    except OSError as exc:
        _err(f"cannot write {args.out}: {exc}")
        return EXIT_ERROR
    return EXIT_OK


def cmd_solve(args) -> int:
    try:
        p = load_problem(args.input)
    except (OSError, FormatError) as exc:
        _err(f"cannot read {args.input}: {exc}")
        return EXIT_ERROR
    try:
        cfg = SolverConfig(
            alpha=args.alpha, eta=args.eta, max_iter=args.max_iter, init_strategy=args.init
        )
    except ValueError as exc:
        _err(str(exc))
        return EXIT_USAGE
    out = solve(p, cfg, ALG_NAMES[args.alg])
    print(out.to_record())
    if args.trace:
        print("\n".join(out.trace_lines()))
    for note in out.warnings:
        _err(f"warning: {note}")
    if args.x_out:
        try:
            with open(args.x_out, "w") as fh:
                fh.write(dumps_vector(out.x))
        except OSError as exc:
            _err(f"cannot write {args.x_out}: {exc}")
            return EXIT_ERROR
    if out.status == CONVERGED:
        return EXIT_OK
    if out.status == ITERATION_CAP:
        _err(f"iteration cap {cfg.max_iter} reached, residual {out.final_residual:.3e}")
        return EXIT_CAP
    _err(f"solver error: {out.message}")
    return EXIT_ERROR


def cmd_bench(args) -> int:
    if args.m < 2:
        _err(f"--m must be >= 2, got {args.m}")
        return EXIT_USAGE
    for n in args.n:
        try:
            bench_mod.check_budget(args.m, n)
        except bench_mod.MemoryBudgetError as exc:
            _err(str(exc))
            return EXIT_BUDGET
    algorithms = [ALG_NAMES[a] for a in args.alg] if args.alg else list(ALG_NAMES.values())
    rows, results = [], []
    for n in args.n:
        spec = bench_mod.BenchSpec(
            GeneratorSpec(f"P{args.problem}", args.m, n),
            alphas=args.alphas,
            trials=args.trials,
            algorithms=tuple(dict.fromkeys(algorithms)),
            base_seed=args.seed,
            eta=args.eta,
            max_iter=args.max_iter,
        )
        res = bench_mod.run_trials(spec, jobs=args.jobs, keep_trace=bool(args.trace_jsonl))
        results.extend(res)
        rows.extend(bench_mod.summarize(spec, res))
    text = bench_mod.emit_csv(rows)
    try:
        if args.csv == "-":
            sys.stdout.write(text)
        else:
            with open(args.csv, "w") as fh:
                fh.write(text)
        if args.trace_jsonl:
            with open(args.trace_jsonl, "w") as fh:
                fh.write(bench_mod.trace_jsonl(results))
    except OSError as exc:
        _err(f"cannot write output: {exc}")
        return EXIT_ERROR
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        p = load_problem(args.input)
        x = load_vector(args.solution) if args.solution else p.witness
    except (OSError, FormatError) as exc:
        _err(f"cannot read input: {exc}")
        return EXIT_ERROR
    checks = {
        "strong_m_certificate": strong_m_certificate(p.tensor),
        "m_matrix_certificate": m_matrix_certificate(p.majorization),
    }
    if x is not None:
        if len(x) != p.n:
            _err(f"solution has {len(x)} values, problem dimension is {p.n}")
            return EXIT_ERROR
        checks["solution"] = verify_solution(p, x, args.tol)
    for name, ok in checks.items():
        print(f"{name}={'pass' if ok else 'fail'}")
    return EXIT_OK if all(checks.values()) else EXIT_ERROR


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "bench": cmd_bench, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
