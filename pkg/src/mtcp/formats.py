"""Plain-text tensor (``.mtt``) and problem (``.mtcp``) files.

``.mtt``::

    m n
    <n**m reals, canonical layout, one last-index fiber per line>

``.mtcp``::

    m n generator seed
    <n rhs values>
    <n witness values, or ->
    <n**m tensor entries, as in .mtt>

Reals are written with ``repr`` (shortest round-trip decimal).
"""
from __future__ import annotations

import numpy as np

from .solver import ProblemInstance
from .tensor_core import DenseTensor


class FormatError(ValueError):
    pass


def _line(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def _entry_lines(T: DenseTensor) -> list[str]:
    rows = T.entries.reshape(-1, T.dim)
    return [_line(r) for r in rows]


def _parse_floats(tokens, count, what):
    if len(tokens) != count:
        raise FormatError(f"{what}: expected {count} values, found {len(tokens)}")
    try:
        return np.array([float(t) for t in tokens])
    except ValueError as exc:
        raise FormatError(f"{what}: {exc}") from None


def _parse_header_ints(tokens, what):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise FormatError(f"{what}: bad header {' '.join(tokens)!r}") from None


def dumps_tensor(T: DenseTensor) -> str:
    return "\n".join([f"{T.order} {T.dim}", *_entry_lines(T)]) + "\n"


def loads_tensor(text: str) -> DenseTensor:
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty tensor file")
    head = lines[0].split()
    if len(head) != 2:
        raise FormatError(f"tensor header must be 'm n', got {lines[0]!r}")
    m, n = _parse_header_ints(head, "tensor header")
    if m < 2 or n < 1:
        raise FormatError(f"invalid order/dimension {m} {n}")
    entries = _parse_floats(" ".join(lines[1:]).split(), n**m, "tensor entries")
    try:
        return DenseTensor(m, n, entries)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def dumps_problem(p: ProblemInstance) -> str:
    seed = "-" if p.seed is None else str(p.seed)
    witness = "-" if p.witness is None else _line(p.witness)
    head = [f"{p.m} {p.n} {p.generator} {seed}", _line(p.rhs), witness]
    return "\n".join(head + _entry_lines(p.tensor)) + "\n"


def loads_problem(text: str) -> ProblemInstance:
    lines = text.splitlines()
    if len(lines) < 4:
        raise FormatError("problem file needs a header, rhs, witness and tensor lines")
    head = lines[0].split()
    if len(head) != 4:
        raise FormatError(f"problem header must be 'm n generator seed', got {lines[0]!r}")
    m, n = _parse_header_ints(head[:2], "problem header")
    if m < 2 or n < 1:
        raise FormatError(f"invalid order/dimension {m} {n}")
    generator = head[2]
    seed = None if head[3] == "-" else _parse_header_ints(head[3:], "problem header")[0]
    rhs = _parse_floats(lines[1].split(), n, "rhs")
    wtok = lines[2].split()
    witness = None if wtok == ["-"] else _parse_floats(wtok, n, "witness")
    entries = _parse_floats(" ".join(lines[3:]).split(), n**m, "tensor entries")
    try:
        return ProblemInstance(DenseTensor(m, n, entries), rhs, witness, generator, seed)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def save_tensor(path, T: DenseTensor) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_tensor(T))


def load_tensor(path) -> DenseTensor:
    with open(path) as fh:
        return loads_tensor(fh.read())


def save_problem(path, p: ProblemInstance) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_problem(p))


def load_problem(path) -> ProblemInstance:
    with open(path) as fh:
        return loads_problem(fh.read())


def load_vector(path) -> np.ndarray:
    with open(path) as fh:
        tokens = fh.read().split()
    try:
        return np.array([float(t) for t in tokens])
    except ValueError as exc:
        raise FormatError(f"vector file: {exc}") from None


def dumps_vector(x) -> str:
    return "\n".join(repr(float(v)) for v in x) + "\n"
