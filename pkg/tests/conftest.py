import itertools

import numpy as np
import pytest

from mtcp import kernels
from mtcp.tensor_core import DenseTensor

# criterion number -> one PASS/FAIL line, printed in order after the run
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(params=kernels.available_backends())
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    impl = kernels.get_backend(request.param)
    monkeypatch.setattr(kernels, "contract_power", impl.contract_power)
    monkeypatch.setattr(kernels, "complement_apply", impl.complement_apply)
    return request.param


def loop_contract(T: DenseTensor, x, skip_major=False):
    """Brute-force oracle: sum over every index tuple."""
    n, m = T.dim, T.order
    arr = T.array
    out = np.zeros(n)
    for idx in itertools.product(range(n), repeat=m):
        tail = idx[1:]
        if skip_major and all(t == tail[0] for t in tail):
            continue
        term = arr[idx]
        for t in tail:
            term *= x[t]
        out[idx[0]] += term
    return out


@pytest.fixture
def small_tensor():
    """m=3, n=2 with a111=1, a122=2, a211=3 (1-based)."""
    arr = np.zeros((2, 2, 2))
    arr[0, 0, 0] = 1.0
    arr[0, 1, 1] = 2.0
    arr[1, 0, 0] = 3.0
    return DenseTensor.from_array(arr)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
