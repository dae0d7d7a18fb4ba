"""Pure numpy fallback for the compiled contraction kernels."""
import numpy as np


def _check(m, n, size, xsize):
    if m < 2:
        raise ValueError(f"order must be >= 2, got {m}")
    if xsize != n:
        raise ValueError(f"vector length {xsize} does not match dimension {n}")
    if size != n**m:
        raise ValueError(f"entries length {size} != {n}**{m}")


def major_offsets(m, n):
    """Flat offsets of every (i, j, ..., j) entry, shaped (n, n)."""
    step = sum(n**k for k in range(m - 1))
    rows = np.arange(n) * n ** (m - 1)
    return rows[:, None] + np.arange(n)[None, :] * step


def _contract(a, m, n, x):
    v = a.reshape((n,) * m)
    for _ in range(m - 1):
        v = v @ x
    return np.ascontiguousarray(v, dtype=np.float64)


def contract_power(a, m, n, x):
    _check(m, n, a.shape[0], x.shape[0])
    return _contract(a, m, n, x)


def complement_apply(a, m, n, x):
    _check(m, n, a.shape[0], x.shape[0])
    # zeroed copy: the majorization entries contribute nothing, nothing is subtracted
    rest = a.copy()
    rest[major_offsets(m, n).ravel()] = 0.0
    return _contract(rest, m, n, x)
