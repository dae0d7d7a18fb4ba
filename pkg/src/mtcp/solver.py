"""Sequential lower-dimensional solvers for the M-tensor complementarity problem.

Find ``x >= 0`` with ``F(x) = A x^{m-1} - b >= 0`` and ``x . F(x) = 0``.

Both methods keep ``x`` zero outside a growing index set ``I`` and, on ``I``,
solve a linear system in ``y = x_I^{[m-1]}`` whose matrix is the principal
submatrix of the majorization matrix:

* ``ld_leqa`` (linear-equation approach) uses the right-hand side
  ``A_I x_I^{[m-1]} - alpha F_I(x)``;
* ``ld_a_newton`` (approximate Newton) subtracts ``alpha F_I(x) + eps`` where
  the correction ``eps`` is clamped into ``[(1-alpha) F_I, -alpha F_I]`` so the
  iterates stay monotone.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from time import perf_counter

import numpy as np

from .linalg import PrincipalSolver, SingularSystemError, solve_principal
from .tensor_core import (
    DenseTensor,
    IndexSet,
    as_index_set,
    as_vector,
    contract_power,
    majorization_split,
    root,
)

CONVERGED = "converged"
ITERATION_CAP = "iteration_cap"
ERROR = "error"

ALGORITHMS = ("ld_leqa", "ld_a_newton")
INIT_STRATEGIES = ("zero", "lower_dim_equation")

ROOT_CLAMP_RTOL = 1e-10
INIT_NEGATIVE_TOL = 1e-12


class NegativePowerDomainError(ArithmeticError):
    """A solved ``y = x_I^{[m-1]}`` came out clearly negative."""


class InitialPointWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Tensor ``A``, right-hand side ``b`` and where they came from.

    ``witness`` is a known solution when the generator built ``b`` from one.
    """

    tensor: DenseTensor
    rhs: np.ndarray
    witness: np.ndarray | None = None
    generator: str = "custom"
    seed: int | None = None

    def __post_init__(self):
        rhs = as_vector(self.rhs, self.tensor.dim).copy()
        rhs.flags.writeable = False
        object.__setattr__(self, "rhs", rhs)
        if self.witness is not None:
            w = as_vector(self.witness, self.tensor.dim).copy()
            w.flags.writeable = False
            object.__setattr__(self, "witness", w)

    @property
    def m(self) -> int:
        return self.tensor.order

    @property
    def n(self) -> int:
        return self.tensor.dim

    @cached_property
    def majorization(self) -> np.ndarray:
        return majorization_split(self.tensor).matrix


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 1.0
    eta: float = 1e-8
    max_iter: int = 1000
    init_strategy: str = "zero"
    rho_fallback: float = 0.5
    epsilon_resolve_cap: int = 1
    # restrict alpha to the open interval the convergence theory assumes
    strict_theory: bool = False
    # keep x, F and the eps bounds on every trace record (needed by check_trace)
    record_iterates: bool = False

    def __post_init__(self):
        hi_ok = self.alpha < 1 if self.strict_theory else self.alpha <= 1
        if not (self.alpha > 0 and hi_ok):
            bound = "(0, 1)" if self.strict_theory else "(0, 1]"
            raise ValueError(f"alpha must lie in {bound}, got {self.alpha}")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.init_strategy not in INIT_STRATEGIES:
            raise ValueError(f"unknown init_strategy {self.init_strategy!r}")
        if not 0 < self.rho_fallback < 1:
            raise ValueError(f"rho_fallback must lie in (0, 1), got {self.rho_fallback}")
        if self.epsilon_resolve_cap < 1:
            raise ValueError("epsilon_resolve_cap must be >= 1")


@dataclass
class IterationRecord:
    k: int
    index_set: IndexSet
    residual: float
    epsilon_resolves: int = 0
    x: np.ndarray | None = field(default=None, repr=False)
    F: np.ndarray | None = field(default=None, repr=False)
    # correction used by the accepted step and its clamp bounds (ld_a_newton)
    eps: np.ndarray | None = field(default=None, repr=False)
    eps_lo: np.ndarray | None = field(default=None, repr=False)
    eps_hi: np.ndarray | None = field(default=None, repr=False)


@dataclass
class SolveOutcome:
    x: np.ndarray
    status: str
    iterations: int
    final_residual: float
    trace: list[IterationRecord]
    index_set_updates: int
    total_epsilon_resolves: int
    algorithm: str = ""
    alpha: float = math.nan
    eta: float = math.nan
    wall_time: float = 0.0
    message: str = ""
    warnings: tuple[str, ...] = ()

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    def to_record(self, include_time: bool = True) -> str:
        fields = [
            f"algorithm={self.algorithm}",
            f"alpha={self.alpha:g}",
            f"status={self.status}",
            f"iterations={self.iterations}",
            f"residual={self.final_residual:.6e}",
            f"index_updates={self.index_set_updates}",
            f"K={self.total_epsilon_resolves}",
        ]
        if include_time:
            fields.append(f"time_s={self.wall_time:.6f}")
        if self.message:
            fields.append(f"message={self.message!r}")
        return " ".join(fields)

    def trace_lines(self) -> list[str]:
        return [
            f"{r.k} {len(r.index_set)} {r.residual:.6e} {r.epsilon_resolves}" for r in self.trace
        ]


def eval_F(p: ProblemInstance, x) -> np.ndarray:
    return contract_power(p.tensor, x) - p.rhs


def residual(F_val, x) -> float:
    """Euclidean norm of ``min(F, x)``."""
    F_val = np.asarray(F_val, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if F_val.shape != x.shape:
        raise ValueError(f"length mismatch: {F_val.shape} vs {x.shape}")
    return float(np.linalg.norm(np.minimum(F_val, x)))


def verify_solution(p: ProblemInstance, x, tol: float) -> bool:
    x = as_vector(x, p.n)
    F = eval_F(p, x)
    gap = abs(float(x @ F))
    return bool(
        x.min() >= -tol
        and F.min() >= -tol
        and gap <= tol * (1 + np.linalg.norm(x) * np.linalg.norm(F))
    )


def _r(p: ProblemInstance, idx: np.ndarray, x: np.ndarray, F: np.ndarray) -> np.ndarray:
    deg = p.m - 1
    A_I = p.majorization[np.ix_(idx, idx)]
    return (F[idx] + p.rhs[idx]) / deg - A_I @ x[idx] ** deg


def compute_r(p: ProblemInstance, index_set, x) -> np.ndarray:
    """``(F_I(x) + b_I) / (m-1) - A_I x_I^{[m-1]}`` with ``F`` taken at the full ``x``."""
    idx = np.asarray(as_index_set(index_set, p.n), dtype=np.intp)
    if idx.size == 0:
        raise ValueError("empty index set")
    x = as_vector(x, p.n)
    return _r(p, idx, x, eval_F(p, x))


def _initial_point(p: ProblemInstance, cfg: SolverConfig):
    n, deg = p.n, p.m - 1
    I0 = as_index_set(np.flatnonzero(p.rhs > 0))
    x = np.zeros(n)
    if not I0 or cfg.init_strategy == "zero":
        return x, I0, None
    try:
        y = solve_principal(p.majorization, I0, p.rhs[list(I0)])
    except SingularSystemError as exc:
        return x, I0, f"equation start failed ({exc}); using the zero start"
    if np.any(y < -INIT_NEGATIVE_TOL):
        return x, I0, "equation start has negative components; using the zero start"
    x[list(I0)] = root(np.maximum(y, 0.0), deg)
    F = eval_F(p, x)
    if not np.any(F < 0):
        x = cfg.rho_fallback * x
        F = eval_F(p, x)
    # the support is kept in the working set so later steps never zero it out
    return x, as_index_set(np.flatnonzero((F < 0) | (x > 0))), None


def initial_point(p: ProblemInstance, cfg: SolverConfig) -> tuple[np.ndarray, IndexSet]:
    """Starting iterate and index set.

    ``zero`` gives ``(0, {i : b_i > 0})``. ``lower_dim_equation`` solves
    ``A_I0 y = b_I0`` and takes ``x_I0 = y^{[1/(m-1)]}``, scaling by
    ``rho_fallback`` when that point leaves no negative component of ``F``.
    An empty index set means ``x = 0`` already solves the problem.
    """
    x, I, note = _initial_point(p, cfg)
    if note:
        warnings.warn(note, InitialPointWarning, stacklevel=2)
    return x, I


def _lift(y: np.ndarray, deg: int) -> np.ndarray:
    tol = ROOT_CLAMP_RTOL * (1.0 + float(np.max(np.abs(y))))
    if np.any(y < -tol):
        worst = float(y.min())
        raise NegativePowerDomainError(f"solved power component {worst:.3e} below -{tol:.1e}")
    return root(np.maximum(y, 0.0), deg)


def _solve(p: ProblemInstance, cfg: SolverConfig, algorithm: str) -> SolveOutcome:
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    start = perf_counter()
    newton = algorithm == "ld_a_newton"
    alpha, deg, n = cfg.alpha, p.m - 1, p.n
    keep = cfg.record_iterates

    x, I, note = _initial_point(p, cfg)
    notes = (note,) if note else ()
    F = eval_F(p, x)
    A = p.majorization
    lin = PrincipalSolver(A)

    idx = np.asarray(I, dtype=np.intp)
    eps = np.zeros(idx.size)
    eps_lo = (1 - alpha) * F[idx]
    eps_hi = -alpha * F[idx]

    trace: list[IterationRecord] = []
    k = updates = total_resolves = 0
    status, message = ITERATION_CAP, ""
    res = residual(F, x)

    while True:
        res = residual(F, x)
        if res <= cfg.eta:
            status = CONVERGED
            break
        if k >= cfg.max_iter:
            status = ITERATION_CAP
            break
        if not I:
            status, message = ERROR, "empty index set at a non-solution"
            break

        base = A[np.ix_(idx, idx)] @ x[idx] ** deg
        F_I = F[idx]
        used = eps
        resolves = 0
        try:
            while True:
                delta = alpha * F_I + used if newton else alpha * F_I
                x_new = np.zeros(n)
                x_new[idx] = _lift(lin.solve(I, base - delta), deg)
                F_new = eval_F(p, x_new)
                if not newton or np.all(F_new[idx] < 0):
                    break
                if resolves >= cfg.epsilon_resolve_cap:
                    break  # accept: at alpha=1 an eps=0 candidate can only reach F_I <= 0
                used = np.zeros(idx.size)
                resolves += 1
        except (SingularSystemError, NegativePowerDomainError) as exc:
            status, message = ERROR, str(exc)
            rec = IterationRecord(k, I, res, resolves)
            if keep:
                rec.x, rec.F = x.copy(), F.copy()
            trace.append(rec)
            break

        rec = IterationRecord(k, I, res, resolves)
        if keep:
            rec.x, rec.F = x.copy(), F.copy()
            if newton:
                rec.eps, rec.eps_lo, rec.eps_hi = used.copy(), eps_lo, eps_hi
        trace.append(rec)
        total_resolves += resolves

        I_new = as_index_set(I + tuple(np.flatnonzero(F_new < 0)))
        if I_new != I:
            updates += 1
        idx_new = np.asarray(I_new, dtype=np.intp)
        if newton:
            eps_lo = (1 - alpha) * F_new[idx_new]
            eps_hi = -alpha * F_new[idx_new]
            dr = _r(p, idx_new, x_new, F_new) - _r(p, idx_new, x, F)
            eps = np.maximum(np.minimum(eps_hi, dr), eps_lo)
        x, F, I, idx = x_new, F_new, I_new, idx_new
        k += 1

    if status != ERROR:
        rec = IterationRecord(k, I, res, 0)
        if keep:
            rec.x, rec.F = x.copy(), F.copy()
        trace.append(rec)

    return SolveOutcome(
        x=x,
        status=status,
        iterations=k,
        final_residual=res,
        trace=trace,
        index_set_updates=updates,
        total_epsilon_resolves=total_resolves,
        algorithm=algorithm,
        alpha=alpha,
        eta=cfg.eta,
        wall_time=perf_counter() - start,
        message=message,
        warnings=notes,
    )


def ld_leqa(p: ProblemInstance, cfg: SolverConfig | None = None) -> SolveOutcome:
    """Sequential lower-dimensional linear-equation method."""
    return _solve(p, cfg or SolverConfig(), "ld_leqa")


def ld_a_newton(p: ProblemInstance, cfg: SolverConfig | None = None) -> SolveOutcome:
    """Sequential lower-dimensional approximate Newton method.

    ``epsilon_resolves`` on each trace record counts how often the step had to
    be re-solved with ``eps = 0`` because the candidate left ``F_I < 0``.
    """
    return _solve(p, cfg or SolverConfig(), "ld_a_newton")


def solve(p: ProblemInstance, cfg: SolverConfig | None = None, algorithm: str = "ld_leqa"):
    return _solve(p, cfg or SolverConfig(), algorithm)


def check_trace(
    p: ProblemInstance,
    outcome: SolveOutcome,
    *,
    monotone_tol: float = 1e-12,
    offset_tol: float = 1e-10,
    eps_tol: float = 1e-14,
    verify_tol: float = 1e-6,
) -> list[str]:
    """List every violated iteration invariant; empty means the run is clean.

    Needs a trace recorded with ``record_iterates=True``.
    """
    recs = outcome.trace
    if any(r.x is None for r in recs):
        raise ValueError("trace lacks iterates; solve with record_iterates=True")
    out = []
    scale = 1.0 + float(np.max(np.abs(p.rhs), initial=0.0))
    for a, b in zip(recs, recs[1:]):
        k = a.k
        drop = np.flatnonzero(b.x < a.x - monotone_tol)
        if drop.size:
            out.append(f"k={k}: iterate decreased at {drop.tolist()}")
        if not set(a.index_set) <= set(b.index_set):
            out.append(f"k={k}: index set shrank {a.index_set} -> {b.index_set}")
        idx = np.asarray(a.index_set, dtype=np.intp)
        # the step must leave F_I(x^{k+1}) <= 0 (strictly < 0 when alpha < 1)
        if idx.size and np.any(b.F[idx] > offset_tol * scale):
            out.append(f"k={k}: F on the index set turned positive, max {b.F[idx].max():.3e}")
        if outcome.algorithm == "ld_leqa":
            off = np.setdiff1d(np.arange(p.n), idx)
            slack = offset_tol * np.maximum(1.0, np.abs(a.F[off]))
            worse = off[b.F[off] > a.F[off] + slack]
            if worse.size:
                out.append(f"k={k}: F increased off the index set at {worse.tolist()}")
        if a.eps is not None:
            tol = eps_tol * (1.0 + np.maximum(np.abs(a.eps_lo), np.abs(a.eps_hi)))
            if np.any(a.eps < a.eps_lo - tol) or np.any(a.eps > a.eps_hi + tol):
                out.append(f"k={k}: eps outside its clamp bounds")
    if np.any(outcome.x < -monotone_tol):
        out.append("final iterate has negative components")
    if outcome.index_set_updates > p.n:
        out.append(f"{outcome.index_set_updates} index-set updates exceed n={p.n}")
    if outcome.converged:
        if not outcome.final_residual <= outcome.eta:
            out.append("converged with residual above eta")
        if not verify_solution(p, outcome.x, verify_tol):
            out.append(f"converged point fails verify_solution at {verify_tol:g}")
    return out

