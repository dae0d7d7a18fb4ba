import warnings

import numpy as np
import pytest

from mtcp.oracle import lcp_enumerate, matrix_problem
from mtcp.problems import GeneratorSpec, generate
from mtcp.solver import (
    CONVERGED,
    ERROR,
    ITERATION_CAP,
    InitialPointWarning,
    ProblemInstance,
    SolverConfig,
    check_trace,
    compute_r,
    eval_F,
    initial_point,
    ld_a_newton,
    ld_leqa,
    residual,
    verify_solution,
)
from mtcp.tensor_core import DenseTensor, identity_tensor

A2 = np.array([[2.0, -1.0], [-1.0, 2.0]])


@pytest.fixture
def lcp11():
    return matrix_problem(A2, [1.0, 1.0])


@pytest.fixture
def p1_small():
    return generate(GeneratorSpec("P1", 3, 10, 4))


class TestSolverConfig:
    @pytest.mark.parametrize("alpha", [0.0, -0.1, 1.5])
    def test_alpha_range(self, alpha):
        with pytest.raises(ValueError):
            SolverConfig(alpha=alpha)

    def test_strict_theory_excludes_one(self):
        SolverConfig(alpha=1.0)
        with pytest.raises(ValueError):
            SolverConfig(alpha=1.0, strict_theory=True)

    @pytest.mark.parametrize(
        "kwargs",
        [{"eta": 0.0}, {"max_iter": 0}, {"init_strategy": "random"}, {"rho_fallback": 1.0},
         {"epsilon_resolve_cap": 0}],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            SolverConfig(**kwargs)

    def test_defaults(self):
        cfg = SolverConfig()
        assert (cfg.alpha, cfg.eta, cfg.max_iter) == (1.0, 1e-8, 1000)


def test_eval_F(lcp11, p1_small):
    assert np.array_equal(eval_F(lcp11, [0.0, 0.0]), [-1.0, -1.0])
    assert np.array_equal(eval_F(lcp11, [1.0, 1.0]), [0.0, 0.0])
    F = eval_F(p1_small, p1_small.witness)
    assert np.max(np.abs(F)) <= 1e-12 * np.max(np.abs(p1_small.rhs))
    with pytest.raises(ValueError):
        eval_F(lcp11, [1.0])


def test_residual():
    assert residual([0.0, 0.0], [1.0, 2.0]) == 0.0
    assert residual([-1.0, 2.0], [0.0, 3.0]) == pytest.approx(np.sqrt(5.0), rel=1e-15)
    assert residual([3.0, 4.0], [0.0, 0.0]) == 0.0
    with pytest.raises(ValueError):
        residual([1.0], [1.0, 2.0])


class TestInitialPoint:
    def test_nonpositive_rhs(self):
        x, I = initial_point(matrix_problem(A2, [-1.0, -2.0]), SolverConfig())
        assert I == () and not x.any()

    def test_zero_strategy(self):
        x, I = initial_point(matrix_problem(A2, [1.0, -3.0]), SolverConfig())
        assert I == (0,) and not x.any()

    def test_equation_strategy_rho_fallback(self, lcp11):
        cfg = SolverConfig(init_strategy="lower_dim_equation", rho_fallback=0.5)
        x, I = initial_point(lcp11, cfg)
        # x0 = (1, 1) already has F = 0, so the scaled point is returned
        assert I == (0, 1)
        assert np.allclose(x, [0.5, 0.5], atol=1e-15)

    def test_equation_strategy_generated(self, p1_small):
        cfg = SolverConfig(init_strategy="lower_dim_equation")
        x, I = initial_point(p1_small, cfg)
        F = eval_F(p1_small, x)
        assert np.all(x >= 0) and np.any(F < 0)
        assert set(np.flatnonzero(x > 0)) <= set(I)

    def test_negative_equation_start_falls_back(self):
        # A_I0^{-1} b_I0 has a negative component: b = (1, 1) but A not an M-matrix
        A = np.array([[1.0, 2.0], [0.0, 1.0]])
        p = matrix_problem(A, [1.0, 1.0])
        with pytest.warns(InitialPointWarning):
            x, I = initial_point(p, SolverConfig(init_strategy="lower_dim_equation"))
        assert not x.any() and I == (0, 1)


class TestLdLeqa:
    def test_one_step_lcp(self, lcp11):
        out = ld_leqa(lcp11, SolverConfig(alpha=1.0))
        assert out.status == CONVERGED
        assert out.iterations == 1
        assert np.allclose(out.x, [1.0, 1.0], atol=1e-15)

    def test_partial_support(self):
        p = matrix_problem(A2, [1.0, -3.0])
        out = ld_leqa(p, SolverConfig(alpha=1.0))
        assert out.status == CONVERGED
        assert np.allclose(out.x, [0.5, 0.0], atol=1e-15)
        assert np.allclose(eval_F(p, out.x), [0.0, 2.5], atol=1e-15)
        oracle = lcp_enumerate(A2, [1.0, -3.0])
        assert oracle.active_set == (0,)

    def test_trivial_zero_solution(self):
        out = ld_leqa(matrix_problem(A2, [-1.0, -2.0]))
        assert out.status == CONVERGED and out.iterations == 0
        assert out.final_residual == 0.0 and not out.x.any()

    def test_iteration_cap(self, p1_small):
        out = ld_leqa(p1_small, SolverConfig(alpha=0.1, max_iter=3))
        assert out.status == ITERATION_CAP
        assert out.iterations == 3
        assert len(out.trace) == 4

    def test_singular_subproblem_is_error(self):
        T = DenseTensor.from_array(np.array([[1.0, -1.0], [-1.0, 1.0]]))
        out = ld_leqa(ProblemInstance(T, [1.0, 1.0]))
        assert out.status == ERROR
        assert "singular" in out.message

    @pytest.mark.parametrize("alpha", [0.3, 0.7, 1.0])
    def test_generated_instance_invariants(self, p1_small, alpha):
        out = ld_leqa(p1_small, SolverConfig(alpha=alpha, record_iterates=True))
        assert out.status == CONVERGED
        assert out.final_residual <= 1e-8
        assert check_trace(p1_small, out) == []

    def test_equation_start_converges(self, p1_small):
        out = ld_leqa(p1_small, SolverConfig(init_strategy="lower_dim_equation", record_iterates=True))
        assert out.converged
        assert check_trace(p1_small, out) == []


def test_compute_r():
    p = matrix_problem(A2, [1.0, 1.0])
    assert np.array_equal(compute_r(p, (0, 1), [0.0, 0.0]), [0.0, 0.0])
    # m = 2 with x zero off I: r reduces to A_{I, not I} x_{not I} = 0
    assert np.allclose(compute_r(p, (0,), [0.7, 0.0]), [0.0], atol=1e-15)
    arr = np.zeros((2, 2, 2))
    arr[0, 0, 0], arr[0, 1, 1], arr[1, 0, 0] = 1.0, 2.0, 3.0
    q = ProblemInstance(DenseTensor.from_array(arr), [1.0, 1.0])
    assert np.allclose(compute_r(q, (0, 1), [1.0, 2.0]), [-4.5, -1.5], atol=1e-15)
    with pytest.raises(ValueError):
        compute_r(q, (), [1.0, 2.0])


class TestLdANewton:
    def test_first_step_matches_leqa(self, p1_small):
        cfg = SolverConfig(alpha=0.5, record_iterates=True)
        a = ld_leqa(p1_small, cfg)
        b = ld_a_newton(p1_small, cfg)
        assert np.max(np.abs(a.trace[1].x - b.trace[1].x)) <= 1e-14

    @pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9, 1.0])
    def test_generated_instance_invariants(self, p1_small, alpha):
        out = ld_a_newton(p1_small, SolverConfig(alpha=alpha, record_iterates=True))
        assert out.status == CONVERGED
        assert out.total_epsilon_resolves == 0
        assert check_trace(p1_small, out) == []

    def test_faster_than_leqa_at_small_alpha(self, p1_small):
        cfg = SolverConfig(alpha=0.1)
        assert ld_a_newton(p1_small, cfg).iterations * 4 < ld_leqa(p1_small, cfg).iterations

    def test_lcp(self):
        p = matrix_problem(A2, [1.0, -3.0])
        out = ld_a_newton(p, SolverConfig(alpha=0.9))
        assert out.converged
        assert np.allclose(out.x, [0.5, 0.0], atol=1e-8)

    def test_resolve_cap_bounds_livelock(self, lcp11):
        # m = 2 with alpha = 1 reaches F_I = 0 exactly, so Step 3 cannot pass
        out = ld_a_newton(lcp11, SolverConfig(alpha=1.0, epsilon_resolve_cap=2))
        assert out.converged
        assert out.total_epsilon_resolves <= 2 * out.iterations


def test_verify_solution(lcp11, p1_small):
    assert verify_solution(lcp11, [1.0, 1.0], 1e-8)
    assert not verify_solution(lcp11, [0.0, 0.0], 1e-8)
    assert verify_solution(p1_small, p1_small.witness, 1e-8)


def test_determinism(p1_small):
    cfg = SolverConfig(alpha=0.3, record_iterates=True)
    for solver in (ld_leqa, ld_a_newton):
        a, b = solver(p1_small, cfg), solver(p1_small, cfg)
        assert a.iterations == b.iterations
        assert a.trace_lines() == b.trace_lines()
        assert all(np.array_equal(r.x, s.x) for r, s in zip(a.trace, b.trace))


def test_outcome_record(lcp11):
    out = ld_leqa(lcp11)
    rec = out.to_record(include_time=False)
    assert "status=converged" in rec and "iterations=1" in rec and "time_s" not in rec
    assert out.trace_lines()[0].startswith("0 2 ")


def test_check_trace_needs_iterates(lcp11):
    with pytest.raises(ValueError):
        check_trace(lcp11, ld_leqa(lcp11))


def test_check_trace_flags_decrease(p1_small):
    out = ld_leqa(p1_small, SolverConfig(record_iterates=True))
    out.trace[2].x = out.trace[2].x + 1.0
    assert any("decreased" in v for v in check_trace(p1_small, out))


def test_identity_problem_solves_in_one_step():
    T = identity_tensor(3, 4)
    xt = np.array([0.2, 0.4, 0.6, 0.8])
    p = ProblemInstance(T, xt**2)
    out = ld_leqa(p)
    assert out.iterations == 1 and np.allclose(out.x, xt, atol=1e-15)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ld_a_newton(p)
