"""Averaged trial sweeps over problem instances, one row per (n, alpha, algorithm).

Trial ``t`` uses the instance seeded with ``base_seed + t``; every algorithm
and every alpha sees that same instance. Averages are taken over converged
trials only and accumulated in trial order, so rows do not depend on how
many worker processes ran the trials.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from .problems import GeneratorSpec, generate, instance_hash, tensor_bytes
from .solver import ALGORITHMS, ProblemInstance, SolveOutcome, SolverConfig, solve

DEFAULT_BUDGET_MB = 512.0
CSV_HEADER = (
    "n",
    "alpha",
    "algorithm",
    "avg_iter",
    "avg_time_s",
    "avg_index_updates",
    "avg_residual",
    "avg_K",
    "fail_count",
)


class MemoryBudgetError(MemoryError):
    def __init__(self, m: int, n: int, needed_mb: float, budget_mb: float):
        self.m, self.n = m, n
        super().__init__(
            f"tensor for m={m}, n={n} needs {needed_mb:.0f} MB, over the {budget_mb:.0f} MB budget"
        )


def memory_budget_mb() -> float:
    raw = os.environ.get("MTCP_MEM_BUDGET_MB")
    return float(raw) if raw else DEFAULT_BUDGET_MB


def check_budget(m: int, n: int, budget_mb: float | None = None) -> None:
    budget = memory_budget_mb() if budget_mb is None else budget_mb
    needed = tensor_bytes(m, n) / 2**20
    if needed > budget:
        raise MemoryBudgetError(m, n, needed, budget)


@dataclass(frozen=True)
class BenchSpec:
    generator: GeneratorSpec
    alphas: Sequence[float]
    trials: int = 100
    algorithms: Sequence[str] = ALGORITHMS
    base_seed: int = 0
    eta: float = 1e-8
    max_iter: int = 1000
    record_iterates: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.alphas or any(not 0 < a <= 1 for a in self.alphas):
            raise ValueError(f"alphas must lie in (0, 1], got {list(self.alphas)}")
        bad = set(self.algorithms) - set(ALGORITHMS)
        if bad or not self.algorithms:
            raise ValueError(f"unknown algorithms {sorted(bad)}")

    def config(self, alpha: float) -> SolverConfig:
        return SolverConfig(
            alpha=alpha,
            eta=self.eta,
            max_iter=self.max_iter,
            record_iterates=self.record_iterates,
        )


@dataclass
class TrialResult:
    trial: int
    seed: int
    algorithm: str
    alpha: float
    instance_hash: str
    status: str
    iterations: int = 0
    time_s: float = 0.0
    index_updates: int = 0
    residual: float = math.nan
    K: int = 0
    reason: str = ""
    trace: list = field(default_factory=list, repr=False)


@dataclass(frozen=True)
class SummaryRow:
    n: int
    alpha: float
    algorithm: str
    avg_iter: float
    avg_time_s: float
    avg_index_updates: float
    avg_residual: float
    avg_K: float
    fail_count: int


Hook = Callable[[int, ProblemInstance, SolveOutcome], None]


def _run_trial(spec: BenchSpec, t: int, hook: Hook | None = None, keep_trace: bool = False):
    seed = spec.base_seed + t
    try:
        p = generate(spec.generator.with_seed(seed))
    except Exception as exc:  # noqa: BLE001 - counted as a failure, sweep continues
        return [
            TrialResult(t, seed, alg, a, "", "error", reason=f"generator: {exc}")
            for alg in spec.algorithms
            for a in spec.alphas
        ]
    digest = instance_hash(p)
    results = []
    for alg in spec.algorithms:
        for a in spec.alphas:
            try:
                out = solve(p, spec.config(a), alg)
            except Exception as exc:  # noqa: BLE001
                results.append(TrialResult(t, seed, alg, a, digest, "error", reason=f"solver: {exc}"))
                continue
            if hook is not None:
                hook(t, p, out)
            results.append(
                TrialResult(
                    t,
                    seed,
                    alg,
                    a,
                    digest,
                    out.status,
                    out.iterations,
                    out.wall_time,
                    out.index_set_updates,
                    out.final_residual,
                    out.total_epsilon_resolves,
                    reason="" if out.converged else (out.message or out.status),
                    trace=out.trace_lines() if keep_trace else [],
                )
            )
    return results


def _run_trial_star(args):
    return _run_trial(*args)


def run_trials(
    spec: BenchSpec,
    *,
    jobs: int = 1,
    hook: Hook | None = None,
    keep_trace: bool = False,
    budget_mb: float | None = None,
) -> list[TrialResult]:
    """Run every trial; results come back in trial order whatever ``jobs`` is.

    ``hook(trial, problem, outcome)`` sees each full outcome and needs ``jobs=1``.
    """
    check_budget(spec.generator.m, spec.generator.n, budget_mb)
    if hook is not None and jobs != 1:
        raise ValueError("a solve hook requires jobs=1")
    if jobs == 1:
        chunks = [_run_trial(spec, t, hook, keep_trace) for t in range(spec.trials)]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            args = [(spec, t, None, keep_trace) for t in range(spec.trials)]
            chunks = list(pool.map(_run_trial_star, args))
    return [r for chunk in chunks for r in chunk]


def summarize(spec: BenchSpec, results: list[TrialResult]) -> list[SummaryRow]:
    rows = []
    for alg in spec.algorithms:
        for a in spec.alphas:
            mine = sorted(
                (r for r in results if r.algorithm == alg and r.alpha == a), key=lambda r: r.trial
            )
            ok = [r for r in mine if r.status == "converged"]
            fails = len(mine) - len(ok)

            def avg(attr):
                if not ok:
                    return math.nan
                total = 0.0
                for r in ok:
                    total += getattr(r, attr)
                return total / len(ok)

            rows.append(
                SummaryRow(
                    spec.generator.n,
                    a,
                    alg,
                    avg("iterations"),
                    avg("time_s"),
                    avg("index_updates"),
                    avg("residual"),
                    avg("K"),
                    fails,
                )
            )
    return sort_rows(rows)


def sort_rows(rows):
    order = {alg: i for i, alg in enumerate(ALGORITHMS)}
    return sorted(rows, key=lambda r: (r.n, r.alpha, order.get(r.algorithm, 99)))


def run_bench(spec: BenchSpec, *, jobs: int = 1, hook: Hook | None = None) -> list[SummaryRow]:
    return summarize(spec, run_trials(spec, jobs=jobs, hook=hook))


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, int):
        return str(v)
    return f"{v:.6g}"


def emit_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in sort_rows(rows):
        w.writerow([_fmt(getattr(r, col)) for col in CSV_HEADER])
    return buf.getvalue()


def parse_csv(text: str) -> list[SummaryRow]:
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for rec in reader:
        rows.append(
            SummaryRow(
                n=int(rec["n"]),
                alpha=float(rec["alpha"]),
                algorithm=rec["algorithm"],
                avg_iter=float(rec["avg_iter"]),
                avg_time_s=float(rec["avg_time_s"]),
                avg_index_updates=float(rec["avg_index_updates"]),
                avg_residual=float(rec["avg_residual"]),
                avg_K=float(rec["avg_K"]),
                fail_count=int(rec["fail_count"]),
            )
        )
    return rows


def trace_jsonl(results: list[TrialResult]) -> str:
    """One JSON object per (trial, algorithm, alpha), timing excluded."""
    lines = []
    for r in results:
        rec = asdict(r)
        rec.pop("time_s")
        lines.append(json.dumps(rec, sort_keys=True))
    return "\n".join(lines) + ("\n" if lines else "")
