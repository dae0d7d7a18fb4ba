"""Principal-submatrix solves and M-matrix certificates."""
from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

PIVOT_RTOL = 1e-14


class SingularSystemError(ArithmeticError):
    """A pivot fell below ``PIVOT_RTOL * ||A_I||_inf``."""

    def __init__(self, pivot_index: int, pivot: float, scale: float):
        self.pivot_index = pivot_index
        self.pivot = pivot
        super().__init__(
            f"numerically singular pivot {pivot:.3e} at position {pivot_index} "
            f"(matrix norm {scale:.3e})"
        )


def _factor(sub: np.ndarray):
    scale = float(np.max(np.sum(np.abs(sub), axis=1))) if sub.size else 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(sub, check_finite=False)
    pivots = np.abs(np.diag(lu))
    bad = np.flatnonzero(pivots <= PIVOT_RTOL * scale)
    if bad.size or scale == 0.0:
        k = int(bad[0]) if bad.size else 0
        raise SingularSystemError(k, float(np.diag(lu)[k]), scale)
    return lu, piv


def solve_principal(A: np.ndarray, index_set, rhs) -> np.ndarray:
    """Solve ``A[I, I] y = rhs`` by LU with partial pivoting."""
    idx = np.asarray(index_set, dtype=np.intp)
    rhs = np.asarray(rhs, dtype=np.float64)
    if idx.size == 0:
        raise ValueError("empty index set")
    if rhs.shape != (idx.size,):
        raise ValueError(f"rhs length {rhs.shape} does not match |I| = {idx.size}")
    factors = _factor(np.asarray(A, dtype=np.float64)[np.ix_(idx, idx)])
    return scipy.linalg.lu_solve(factors, rhs, check_finite=False)


class PrincipalSolver:
    """``solve_principal`` against one matrix, caching factorizations by index set.

    Each solver run owns its instance; the cache is not shared across threads.
    """

    def __init__(self, A: np.ndarray):
        self.A = np.asarray(A, dtype=np.float64)
        self._cache: dict[tuple[int, ...], tuple] = {}
        self.factorizations = 0

    def solve(self, index_set: tuple[int, ...], rhs) -> np.ndarray:
        key = tuple(index_set)
        if not key:
            raise ValueError("empty index set")
        factors = self._cache.get(key)
        if factors is None:
            idx = np.asarray(key, dtype=np.intp)
            factors = _factor(self.A[np.ix_(idx, idx)])
            self._cache[key] = factors
            self.factorizations += 1
        rhs = np.asarray(rhs, dtype=np.float64)
        if rhs.shape != (len(key),):
            raise ValueError(f"rhs length {rhs.shape} does not match |I| = {len(key)}")
        return scipy.linalg.lu_solve(factors, rhs, check_finite=False)


def z_matrix_check(A) -> bool:
    A = np.asarray(A, dtype=np.float64)
    off = A[~np.eye(A.shape[0], dtype=bool)]
    return bool(np.all(off <= 0))


def m_matrix_certificate(A) -> bool:
    """Sufficient test for a nonsingular M-matrix: Z-matrix with ``A e > 0``.

    A ``False`` result is inconclusive.
    """
    A = np.asarray(A, dtype=np.float64)
    return z_matrix_check(A) and bool(np.all(A.sum(axis=1) > 0))
