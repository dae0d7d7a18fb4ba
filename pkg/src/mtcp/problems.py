"""Seeded M-tensor test problems.

All three families have the form ``A = s I - B`` with ``B >= 0``:

* ``P1``: ``B`` i.i.d. uniform on (0, 1), ``s = (1 + eps) max_i (B e^{m-1})_i``;
* ``P2``: as P1 with ``B`` symmetrized by averaging over index permutations;
* ``P3``: ``B[i1..im] = |sin(i1 + ... + im)|`` with 1-based indices, ``s = n^{m-1}``.

The right-hand side is ``b = A xt^{m-1}`` for a witness ``xt`` uniform on
(0, 1), so ``xt`` itself solves the problem.

Randomness comes from numpy's PCG64 seeded through ``SeedSequence(seed)``,
spawned into two child streams: child 0 draws ``B``, child 1 draws ``xt``.
Exact zeros from ``Generator.random`` are redrawn so draws lie in the open
interval.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from itertools import combinations_with_replacement, permutations

import numpy as np

from .linalg import m_matrix_certificate
from .solver import ProblemInstance
from .tensor_core import DenseTensor, contract_power, diagonal_offsets

KINDS = ("P1", "P2", "P3")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    m: int
    n: int
    seed: int = 0
    eps: float = 0.01

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.m < 2 or self.n < 1:
            raise ValueError(f"need m >= 2 and n >= 1, got m={self.m}, n={self.n}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.kind != "P3" and not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")

    def with_seed(self, seed: int) -> GeneratorSpec:
        return replace(self, seed=seed)


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    tensor_ss, rhs_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.Generator(np.random.PCG64(tensor_ss)), np.random.Generator(
        np.random.PCG64(rhs_ss)
    )


def open_uniform(rng: np.random.Generator, size: int) -> np.ndarray:
    u = rng.random(size)
    while True:
        zero = np.flatnonzero(u == 0.0)
        if not zero.size:
            return u
        u[zero] = rng.random(zero.size)


def _shift(B: np.ndarray, m: int, n: int, s: float) -> DenseTensor:
    entries = -B
    entries[diagonal_offsets(m, n)] += s
    return DenseTensor(m, n, entries)


def _row_sums(B: np.ndarray, n: int) -> np.ndarray:
    return B.reshape(n, -1).sum(axis=1)


def gen_rhs(T: DenseTensor, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(b, xt)`` with ``b = T xt^{m-1}``."""
    _, rng = _streams(seed)
    xt = open_uniform(rng, T.dim)
    return contract_power(T, xt), xt


def _finish(T: DenseTensor, spec: GeneratorSpec) -> ProblemInstance:
    b, xt = gen_rhs(T, spec.seed)
    return ProblemInstance(T, b, witness=xt, generator=spec.kind, seed=spec.seed)


def gen_problem1(spec: GeneratorSpec) -> ProblemInstance:
    if spec.kind != "P1":
        raise ValueError(f"expected a P1 spec, got {spec.kind}")
    m, n = spec.m, spec.n
    rng, _ = _streams(spec.seed)
    B = open_uniform(rng, n**m)
    s = (1 + spec.eps) * float(_row_sums(B, n).max())
    return _finish(_shift(B, m, n, s), spec)


def symmetrize(B: np.ndarray, m: int, n: int) -> np.ndarray:
    """Average each entry over all permutations of its multi-index.

    Every orbit is summed once, in a fixed permutation order, and the value
    written back to all of its positions, so the result is exactly symmetric.
    """
    T = B.reshape((n,) * m)
    combos = np.array(list(combinations_with_replacement(range(n), m)), dtype=np.intp)
    perms = list(permutations(range(m)))
    acc = np.zeros(len(combos))
    for perm in perms:
        acc += T[tuple(combos[:, p] for p in perm)]
    acc /= math.factorial(m)
    out = np.empty_like(T)
    for perm in perms:
        out[tuple(combos[:, p] for p in perm)] = acc
    return out.ravel()


def gen_problem2(spec: GeneratorSpec) -> ProblemInstance:
    if spec.kind != "P2":
        raise ValueError(f"expected a P2 spec, got {spec.kind}")
    m, n = spec.m, spec.n
    rng, _ = _streams(spec.seed)
    B = symmetrize(open_uniform(rng, n**m), m, n)
    s = (1 + spec.eps) * float(_row_sums(B, n).max())
    return _finish(_shift(B, m, n, s), spec)


def problem3_tensor(m: int, n: int) -> DenseTensor:
    total = np.zeros((n,) * m, dtype=np.int64)
    for axis in range(m):
        shape = [1] * m
        shape[axis] = n
        total = total + np.arange(1, n + 1).reshape(shape)
    B = np.abs(np.sin(total.astype(np.float64))).ravel()
    return _shift(B, m, n, float(n ** (m - 1)))


def gen_problem3(spec: GeneratorSpec) -> ProblemInstance:
    if spec.kind != "P3":
        raise ValueError(f"expected a P3 spec, got {spec.kind}")
    return _finish(problem3_tensor(spec.m, spec.n), spec)


_GENERATORS = {"P1": gen_problem1, "P2": gen_problem2, "P3": gen_problem3}


def generate(spec: GeneratorSpec) -> ProblemInstance:
    return _GENERATORS[spec.kind](spec)


def strong_m_certificate(T: DenseTensor) -> bool:
    """Z-tensor with ``T e^{m-1} > 0``: sufficient for a strong M-tensor."""
    off = np.ones(T.entries.shape[0], dtype=bool)
    off[diagonal_offsets(T.order, T.dim)] = False
    if np.any(T.entries[off] > 0):
        return False
    return bool(np.all(contract_power(T, np.ones(T.dim)) > 0))


def certify(p: ProblemInstance) -> bool:
    """Both certificates a generated instance must pass."""
    return strong_m_certificate(p.tensor) and m_matrix_certificate(p.majorization)


def instance_hash(p: ProblemInstance) -> str:
    h = hashlib.sha256()
    h.update(np.array([p.m, p.n], dtype=np.int64).tobytes())
    h.update(p.tensor.entries.tobytes())
    h.update(p.rhs.tobytes())
    return h.hexdigest()[:16]


def tensor_bytes(m: int, n: int) -> int:
    return 8 * n**m
