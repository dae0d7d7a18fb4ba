"""Ground-truth solvers for tiny instances, used only to check the main solvers.

Both enumerate candidate supports ``I`` by cardinality, then lexicographically,
solve ``F_I(x) = 0`` with ``x`` zero off ``I`` and return the first candidate
that is complementary. Nothing here touches the solver's iteration code.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .solver import ProblemInstance
from .tensor_core import DenseTensor

FEAS_TOL = 1e-10


class OracleFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleSolution:
    x: np.ndarray
    active_set: tuple[int, ...]
    certified: bool


def _supports(n: int):
    for size in range(n + 1):
        yield from combinations(range(n), size)


def _tensor_apply(T: np.ndarray, x: np.ndarray) -> np.ndarray:
    # independent of the kernels: plain einsum-free repeated tensordot
    v = T
    for _ in range(T.ndim - 1):
        v = np.tensordot(v, x, axes=([v.ndim - 1], [0]))
    return v


def _jacobian(T: np.ndarray, x: np.ndarray) -> np.ndarray:
    m = T.ndim
    J = np.zeros((T.shape[0], T.shape[0]))
    for keep in range(1, m):
        v = T
        # contract every trailing axis except ``keep`` with x
        for axis in range(m - 1, 0, -1):
            if axis != keep:
                v = np.tensordot(v, x, axes=([axis], [0]))
        J += v
    return J


def lcp_enumerate(A, b) -> OracleSolution:
    """Solve the LCP ``x >= 0, Ax - b >= 0, x.(Ax - b) = 0`` by support enumeration."""
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = b.shape[0]
    if n > 12:
        raise ValueError(f"enumeration is limited to n <= 12, got {n}")
    for support in _supports(n):
        idx = list(support)
        x = np.zeros(n)
        if idx:
            try:
                x[idx] = np.linalg.solve(A[np.ix_(idx, idx)], b[idx])
            except np.linalg.LinAlgError:
                continue
        if np.any(x < -FEAS_TOL):
            continue
        F = A @ x - b
        rest = np.setdiff1d(np.arange(n), idx)
        if np.any(F[rest] < -FEAS_TOL):
            continue
        return OracleSolution(np.maximum(x, 0.0), tuple(idx), True)
    raise OracleFailure("no complementary support found")


def _newton(T, b, idx, z0, iters=200, tol=1e-12):
    n = b.shape[0]
    scale = 1.0 + np.max(np.abs(b))

    def g(z):
        x = np.zeros(n)
        x[idx] = z
        return (_tensor_apply(T, x) - b)[idx], x

    z = z0
    G, x = g(z)
    for _ in range(iters):
        if np.max(np.abs(G)) <= tol * scale:
            return z
        J = _jacobian(T, x)[np.ix_(idx, idx)]
        try:
            d = np.linalg.solve(J, -G)
        except np.linalg.LinAlgError:
            return None
        norm = np.linalg.norm(G)
        t = 1.0
        while t > 1e-10:
            G_t, x_t = g(z + t * d)
            if np.linalg.norm(G_t) <= (1 - 1e-4 * t) * norm:
                break
            t *= 0.5
        else:
            return None
        z, G, x = z + t * d, G_t, x_t
    return z if np.max(np.abs(G)) <= tol * scale else None


def _starts(lifted: np.ndarray):
    # the root-lifted point first; uniform points at and above its scale catch
    # supports where Newton from it lands on a mixed-sign root
    top = max(float(lifted.max()), 1e-3)
    yield lifted
    for factor in (1.0, 2.0, 4.0):
        yield np.full(lifted.shape, factor * top)


def tcp_brute_small(p: ProblemInstance) -> OracleSolution:
    """Enumerate supports and solve each reduced tensor equation by damped Newton."""
    if p.n > 4 or p.m > 4:
        raise ValueError(f"brute force is limited to n <= 4 and m <= 4, got n={p.n}, m={p.m}")
    T = p.tensor.array
    A = p.majorization
    b = np.asarray(p.rhs)
    deg = p.m - 1
    for support in _supports(p.n):
        idx = list(support)
        x = np.zeros(p.n)
        if idx:
            try:
                y = np.linalg.solve(A[np.ix_(idx, idx)], b[idx])
            except np.linalg.LinAlgError:
                continue
            z = None
            for z0 in _starts(np.abs(y) ** (1.0 / deg)):
                z = _newton(T, b, idx, z0)
                if z is None:
                    continue
                if deg % 2 == 0 and np.all(z <= FEAS_TOL):
                    z = -z  # even power: -z solves the same equation
                if np.all(z >= -FEAS_TOL):
                    break
            if z is None:
                continue
            x[idx] = z
        if np.any(x < -FEAS_TOL):
            continue
        F = _tensor_apply(T, x) - b
        rest = np.setdiff1d(np.arange(p.n), idx)
        if np.any(F[rest] < -FEAS_TOL):
            continue
        return OracleSolution(np.maximum(x, 0.0), tuple(idx), True)
    raise OracleFailure("no support produced a certified solution")


def random_z_lcp(seed: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Strictly row-diagonally-dominant Z-matrix and a mixed-sign ``b``."""
    rng = np.random.default_rng(seed)
    A = -rng.random((n, n)) * (rng.random((n, n)) < 0.6)
    np.fill_diagonal(A, 0.0)
    np.fill_diagonal(A, -A.sum(axis=1) + 0.1 + rng.random(n))
    b = rng.uniform(-1.0, 1.0, n)
    return A, b


def matrix_problem(A, b) -> ProblemInstance:
    """Wrap a matrix LCP as an order-2 tensor problem."""
    A = np.asarray(A, dtype=np.float64)
    return ProblemInstance(DenseTensor.from_array(A), b, generator="lcp")
