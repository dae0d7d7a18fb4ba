"""Dense tensors, tensor-vector contraction and the majorization split.

A tensor of order ``m`` and dimension ``n`` is stored as a flat float64 array
of ``n**m`` entries with the last index varying fastest, so entry
``(i1, ..., im)`` (0-based here) sits at ``sum(ik * n**(m-1-k))``.

Index sets are sorted tuples of distinct 0-based indices.
"""
from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from . import kernels
from ._kernels_py import major_offsets

IndexSet = Tuple[int, ...]


def as_index_set(members: Iterable[int], n: int | None = None) -> IndexSet:
    """Sort and deduplicate ``members``; check them against ``range(n)``."""
    out = tuple(sorted({int(i) for i in members}))
    if n is not None and out and (out[0] < 0 or out[-1] >= n):
        raise ValueError(f"index set {out} out of range for dimension {n}")
    return out


def as_vector(x, n: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise ValueError(f"vector length {v.shape[0]} does not match dimension {n}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


@dataclass(frozen=True, eq=False)
class DenseTensor:
    """Real tensor of order ``order`` and dimension ``dim``.

    ``entries`` is copied into a read-only contiguous buffer, so instances can
    be shared freely.
    """

    order: int
    dim: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.order < 2:
            raise ValueError(f"order must be >= 2, got {self.order}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        data = np.array(self.entries, dtype=np.float64, copy=True).ravel()
        if data.shape[0] != self.dim**self.order:
            raise ValueError(
                f"expected {self.dim**self.order} entries for order {self.order}, "
                f"dim {self.dim}; got {data.shape[0]}"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("tensor has non-finite entries")
        data.flags.writeable = False
        object.__setattr__(self, "entries", data)

    @classmethod
    def from_array(cls, arr) -> DenseTensor:
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim < 2 or len(set(arr.shape)) != 1:
            raise ValueError(f"expected a cubical array of order >= 2, got shape {arr.shape}")
        return cls(arr.ndim, arr.shape[0], arr.ravel())

    @property
    def array(self) -> np.ndarray:
        """Read-only ``(n,) * m`` view of the entries."""
        return self.entries.reshape((self.dim,) * self.order)

    def __getitem__(self, index) -> float:
        return float(self.array[tuple(index)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return (
            self.order == other.order
            and self.dim == other.dim
            and np.array_equal(self.entries, other.entries)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class MajorizationSplit:
    """Majorization matrix ``A[i, j] = a[i, j, ..., j]`` of ``source``.

    The complement tensor is never built; ``complement_apply`` evaluates it.
    """

    matrix: np.ndarray
    source: DenseTensor

    def complement_apply(self, x) -> np.ndarray:
        return complement_apply(self.source, x)


def contract_power(T: DenseTensor, x) -> np.ndarray:
    """Return ``T x^{m-1}``: ``v[i] = sum a[i, i2, ..., im] x[i2] ... x[im]``."""
    x = as_vector(x, T.dim)
    return kernels.contract_power(T.entries, T.order, T.dim, np.ascontiguousarray(x))


def full_form(T: DenseTensor, x) -> float:
    x = as_vector(x, T.dim)
    return float(x @ contract_power(T, x))


def elementwise_power(x, alpha: float) -> np.ndarray:
    """Component-wise ``x**alpha``; fractional powers need ``x >= 0``."""
    x = as_vector(x)
    if float(alpha) != int(alpha) and np.any(x < 0):
        raise ValueError(f"negative component with fractional power {alpha}")
    if alpha == 0.5:
        return np.sqrt(x)
    return np.power(x, alpha)


def root(y: np.ndarray, degree: int) -> np.ndarray:
    """Inverse of ``elementwise_power(., degree)`` on nonnegative input."""
    if degree == 1:
        return y.copy()
    if degree == 2:
        return np.sqrt(y)
    if degree == 3:
        return np.cbrt(y)
    return np.power(y, 1.0 / degree)


def majorization_split(T: DenseTensor) -> MajorizationSplit:
    matrix = T.entries[major_offsets(T.order, T.dim)].copy()
    matrix.flags.writeable = False
    return MajorizationSplit(matrix, T)


def complement_apply(T: DenseTensor, x) -> np.ndarray:
    """Contract ``T`` with ``x`` skipping every ``(i, j, ..., j)`` tuple."""
    x = as_vector(x, T.dim)
    return kernels.complement_apply(T.entries, T.order, T.dim, np.ascontiguousarray(x))


def principal_subtensor(T: DenseTensor, index_set) -> DenseTensor:
    idx = as_index_set(index_set, T.dim)
    if not idx:
        raise ValueError("principal subtensor needs a nonempty index set")
    sub = T.array[np.ix_(*([list(idx)] * T.order))]
    return DenseTensor(T.order, len(idx), sub.ravel())


def identity_tensor(m: int, n: int) -> DenseTensor:
    if m < 2 or n < 1:
        raise ValueError(f"need m >= 2 and n >= 1, got m={m}, n={n}")
    entries = np.zeros(n**m)
    entries[diagonal_offsets(m, n)] = 1.0
    return DenseTensor(m, n, entries)


def diagonal_offsets(m: int, n: int) -> np.ndarray:
    """Flat offsets of the ``(i, ..., i)`` entries."""
    return np.arange(n) * sum(n**k for k in range(m))
