"""Kernel backend selection.

The compiled backend is used when it imports; ``MTCP_KERNELS=python`` forces
the numpy fallback. ``get_backend`` hands out either one explicitly so the
two can be compared side by side.
"""
import importlib
import os
from types import ModuleType

from . import _kernels_py


def _load_compiled() -> ModuleType | None:
    try:
        return importlib.import_module("mtcp._kernels")
    except ImportError:
        return None


_compiled = _load_compiled()


def available_backends() -> list[str]:
    return ["cython", "python"] if _compiled is not None else ["python"]


def get_backend(name: str) -> ModuleType:
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; reinstall with Cython available")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


def _select() -> tuple[str, ModuleType]:
    wanted = os.environ.get("MTCP_KERNELS", "").strip().lower()
    if wanted:
        return wanted, get_backend(wanted)
    if _compiled is not None:
        return "cython", _compiled
    return "python", _kernels_py


BACKEND, _impl = _select()

contract_power = _impl.contract_power
complement_apply = _impl.complement_apply
