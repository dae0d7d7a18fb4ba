import math

import pytest

from mtcp import bench
from mtcp.bench import (
    CSV_HEADER,
    BenchSpec,
    MemoryBudgetError,
    SummaryRow,
    check_budget,
    emit_csv,
    parse_csv,
    run_bench,
    run_trials,
    summarize,
    trace_jsonl,
)
from mtcp.problems import GeneratorSpec, generate, instance_hash
from mtcp.solver import check_trace


def small_spec(**kw):
    base = dict(generator=GeneratorSpec("P1", 3, 5), alphas=(0.5, 1.0), trials=4)
    base.update(kw)
    return BenchSpec(**base)


def strip_time(rows):
    return [r.__class__(**{**r.__dict__, "avg_time_s": 0.0}) for r in rows]


def test_emit_csv_empty_is_header_only():
    assert emit_csv([]) == ",".join(CSV_HEADER) + "\n"


def test_emit_csv_single_row():
    row = SummaryRow(10, 0.1, "ld_leqa", 411.0, 0.0123456789, 1.26, 6.7e-9, 0.0, 0)
    lines = emit_csv([row]).splitlines()
    assert len(lines) == 2
    assert lines[1] == "10,0.1,ld_leqa,411,0.0123457,1.26,6.7e-09,0,0"


def test_csv_round_trip():
    rows = run_bench(small_spec())
    back = parse_csv(emit_csv(rows))
    assert len(back) == len(rows)
    for a, b in zip(rows, back):
        assert (a.n, a.alpha, a.algorithm, a.fail_count) == (b.n, b.alpha, b.algorithm, b.fail_count)
        for col in ("avg_iter", "avg_index_updates", "avg_residual", "avg_K"):
            assert getattr(b, col) == pytest.approx(getattr(a, col), rel=5e-6)


def test_rows_sorted_by_n_alpha_algorithm():
    rows = run_bench(small_spec(alphas=(1.0, 0.5)))
    keys = [(r.n, r.alpha, r.algorithm) for r in rows]
    assert keys == [
        (5, 0.5, "ld_leqa"),
        (5, 0.5, "ld_a_newton"),
        (5, 1.0, "ld_leqa"),
        (5, 1.0, "ld_a_newton"),
    ]


def test_bench_is_deterministic():
    spec = small_spec()
    assert strip_time(run_bench(spec)) == strip_time(run_bench(spec))


def test_trials_share_instances():
    spec = small_spec(trials=3)
    res = run_trials(spec)
    assert len(res) == 3 * 2 * 2
    for r in res:
        assert r.seed == spec.base_seed + r.trial
        assert r.instance_hash == instance_hash(generate(spec.generator.with_seed(r.seed)))
    hashes = {r.trial: set() for r in res}
    for r in res:
        hashes[r.trial].add(r.instance_hash)
    assert all(len(h) == 1 for h in hashes.values())
    assert len({next(iter(h)) for h in hashes.values()}) == 3


def test_base_seed_offsets_trials():
    a = run_trials(small_spec(trials=2, base_seed=0))
    b = run_trials(small_spec(trials=1, base_seed=1))
    assert a[-1].instance_hash == b[0].instance_hash


def test_averages_over_converged_only():
    spec = small_spec(alphas=(1.0,), algorithms=("ld_leqa",), trials=3)
    res = run_trials(spec)
    res[1].status = "iteration_cap"
    res[1].iterations = 10**6
    (row,) = summarize(spec, res)
    assert row.fail_count == 1
    assert row.avg_iter == pytest.approx((res[0].iterations + res[2].iterations) / 2)


def test_all_failed_gives_nan():
    spec = small_spec(alphas=(1.0,), algorithms=("ld_leqa",), trials=2)
    res = run_trials(spec)
    for r in res:
        r.status = "error"
    (row,) = summarize(spec, res)
    assert row.fail_count == 2 and math.isnan(row.avg_iter)


def test_converged_rows_meet_eta():
    for row in run_bench(small_spec(trials=5)):
        assert row.fail_count == 0
        assert row.avg_residual <= 1e-8
        assert row.avg_K == 0


def test_iteration_cap_counts_as_failure():
    rows = run_bench(small_spec(alphas=(0.1,), algorithms=("ld_leqa",), max_iter=3, trials=2))
    assert rows[0].fail_count == 2


@pytest.mark.parametrize("m,n,ok", [(3, 10, True), (3, 400, True), (3, 500, False), (4, 100, False)])
def test_memory_budget(m, n, ok):
    if ok:
        check_budget(m, n)
    else:
        with pytest.raises(MemoryBudgetError):
            check_budget(m, n)


def test_budget_env_override(monkeypatch):
    monkeypatch.setenv("MTCP_MEM_BUDGET_MB", "0.0001")
    with pytest.raises(MemoryBudgetError):
        run_trials(small_spec())
    monkeypatch.setenv("MTCP_MEM_BUDGET_MB", "100")
    assert bench.memory_budget_mb() == 100.0


def test_jobs_match_serial():
    spec = small_spec(trials=3)
    serial = run_trials(spec, jobs=1)
    parallel = run_trials(spec, jobs=2)
    key = lambda r: (r.trial, r.algorithm, r.alpha, r.instance_hash, r.status, r.iterations, r.residual)
    assert [key(r) for r in serial] == [key(r) for r in parallel]


def test_hook_sees_every_solve_and_invariants_hold():
    spec = small_spec(record_iterates=True, trials=3)
    seen = []

    def hook(t, p, out):
        seen.append((t, out.algorithm, out.alpha))
        assert check_trace(p, out) == []

    run_trials(spec, hook=hook)
    assert len(seen) == 3 * 2 * 2


def test_hook_rejects_parallel():
    with pytest.raises(ValueError):
        run_trials(small_spec(), jobs=2, hook=lambda *a: None)


def test_trace_jsonl_excludes_time():
    res = run_trials(small_spec(trials=1), keep_trace=True)
    text = trace_jsonl(res)
    assert text.count("\n") == len(res)
    assert "time_s" not in text
    assert trace_jsonl(res) == trace_jsonl(run_trials(small_spec(trials=1), keep_trace=True))


@pytest.mark.parametrize(
    "kw",
    [dict(trials=0), dict(alphas=()), dict(alphas=(1.5,)), dict(algorithms=("bogus",))],
)
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        small_spec(**kw)
