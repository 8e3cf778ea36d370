import functools
import itertools

import numpy as np
import pytest

from wghz.quantum_core import PAULIS


def kron_all(mats):
    return functools.reduce(np.kron, mats)


def kron_tensor(rho: np.ndarray, n: int) -> np.ndarray:
    """Correlation tensor by explicit Kronecker products; slow but independent."""
    out = np.zeros((4,) * n)
    for idx in itertools.product(range(4), repeat=n):
        out[idx] = np.trace(rho @ kron_all([PAULIS[i] for i in idx])).real
    return out


def random_pure(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def record(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
