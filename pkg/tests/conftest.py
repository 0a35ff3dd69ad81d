import math

import numpy as np
import pytest

from hamlearn.pauli import PauliString


def naive_spectrum(u: np.ndarray) -> np.ndarray:
    """``Tr[sigma_x u] / 2**n`` one Pauli at a time."""
    dim = u.shape[0]
    n = dim.bit_length() - 1
    return np.array([np.trace(PauliString.from_index(n, k).to_matrix() @ u) / dim for k in range(4**n)])


def explicit_bell_norm(a: np.ndarray) -> float:
    """Norm of ``(a ⊗ I)|Phi>`` with the 4**n-entry state written out."""
    dim = a.shape[0]
    phi = np.eye(dim).reshape(-1) / math.sqrt(dim)
    return float(np.linalg.norm(np.kron(a, np.eye(dim)) @ phi))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# Lines reported by the acceptance suite, echoed at the end of the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
