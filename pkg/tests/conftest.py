import functools

import numpy as np
import pytest

from qfi_lab.states import ProbeState

I2 = np.eye(2)
Z = np.diag([1.0, -1.0])
X = np.array([[0.0, 1.0], [1.0, 0.0]])
H = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)


def kron_all(ops):
    return functools.reduce(np.kron, ops)


def z_op(n, j):
    """Dense sigma_z on qubit j (0-based, qubit 0 = leftmost tensor factor)."""
    return kron_all([Z if k == j else I2 for k in range(n)])


def dense_qfim(state: ProbeState) -> np.ndarray:
    """Covariance of Z_j from explicit operators, independent of the bit kernels."""
    psi = state.amplitudes
    n = state.num_qubits
    ops = [z_op(n, j) for j in range(n)]
    ev = [np.vdot(psi, op @ psi).real for op in ops]
    f = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            f[i, j] = np.vdot(psi, ops[i] @ ops[j] @ psi).real - ev[i] * ev[j]
    return f


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


# one status line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
