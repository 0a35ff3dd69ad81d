import math

import numpy as np
import pytest

from hamlearn import dense
from hamlearn.errors import DomainError
from hamlearn.oracle import EvolutionOracle
from hamlearn.pauli import PauliHamiltonian, frobenius_norm, random_sparse_hamiltonian, residual, spectral_norm
from hamlearn.sparsity import (
    Sparsity,
    far_instance,
    sparsity_thresholds,
    test_sparsity,
    trotter_error_bound,
    trotter_error_exact,
    trotter_steps,
)


def test_thresholds():
    eps1, eps2 = sparsity_thresholds(0.2)
    assert eps1 == pytest.approx(0.125)
    assert eps2 == pytest.approx(0.2 * math.sqrt(57 - 8 * math.sqrt(10)) / 8)
    assert eps2 / 0.2 == pytest.approx(0.703804157759069, abs=1e-12)
    assert eps2 > eps1


def test_trotter_steps():
    assert trotter_steps(0.14, 1.0, 3, 0.2) == math.ceil(8 * 0.14 * math.sqrt(3) / 0.2)
    assert trotter_steps(0.0, 1.0, 3, 0.2) == 1


def test_bound_formula():
    assert trotter_error_bound(2.0, 4, 0.5, 1.5) == pytest.approx(0.75)
    assert trotter_error_bound(2.0, 8, 0.5, 1.5) == pytest.approx(0.375)
    assert trotter_error_bound(2.0, 4, 0.0, 1.5) == 0.0
    with pytest.raises(DomainError):
        trotter_error_bound(1.0, 0, 1.0, 1.0)


def test_exact_error_zero_cases():
    h = PauliHamiltonian.from_labels({"ZI": 0.4, "ZZ": 0.3})
    h_hat = PauliHamiltonian.from_labels({"IZ": 0.5})
    assert trotter_error_exact(h, h_hat, 0.7, 3) < 1e-10
    assert trotter_error_exact(PauliHamiltonian.from_labels({"X": 1.0}), PauliHamiltonian.from_labels({"Z": 1.0}), 0.0, 5) < 1e-12


def test_exact_error_within_bound(rng):
    for _ in range(30):
        n = int(rng.integers(1, 4))
        h = random_sparse_hamiltonian(n, min(3, 4**n - 1), rng=rng)
        h_hat = random_sparse_hamiltonian(n, min(2, 4**n - 1), rng=rng)
        steps = int(rng.integers(1, 10))
        dt = float(rng.uniform(0.01, 0.5))
        exact = trotter_error_exact(h, h_hat, dt, steps)
        assert exact <= trotter_error_bound(steps * dt, steps, frobenius_norm(h_hat), spectral_norm(h)) + 1e-12


def test_exact_error_falls_with_steps():
    h = PauliHamiltonian.from_labels({"XI": 0.7, "ZZ": 0.5})
    h_hat = PauliHamiltonian.from_labels({"YI": 0.6, "IX": 0.4})
    errs = [trotter_error_exact(h, h_hat, 2.0 / r, r) for r in (1, 2, 4, 8, 16)]
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_amplitude_sandwich(rng):
    # Non-identity amplitude moves by at most the exact Trotter error.
    for _ in range(10):
        h = random_sparse_hamiltonian(2, 3, rng=rng)
        h_hat = random_sparse_hamiltonian(2, 2, rng=rng)
        dt, steps = 0.2, 4
        block = np.linalg.matrix_power(dense.evolve(h_hat, -dt) @ dense.evolve(h, dt), steps)
        ideal = dense.evolve(residual(h, h_hat, 1.0), steps * dt)
        amp = lambda u: math.sqrt(max(0.0, 1 - abs(np.trace(u) / 4) ** 2))  # noqa: E731
        assert abs(amp(block) - amp(ideal)) <= trotter_error_exact(h, h_hat, dt, steps) + 1e-12


def test_far_instance():
    h = far_instance(4, 3, 0.2, np.random.default_rng(0))
    assert len(h) == 4
    assert all(abs(c) == 0.2 for c in h.coefficients().values())
    assert spectral_norm(h) <= 1.0


def test_zero_is_sparse():
    v = test_sparsity(EvolutionOracle(PauliHamiltonian.zero(3), np.random.default_rng(0)), 0, 0.2, 1.0, 0.1)
    assert v.verdict is Sparsity.M_SPARSE
    v = test_sparsity(EvolutionOracle(PauliHamiltonian.zero(3), np.random.default_rng(0)), 2, 0.2, 1.0, 0.1)
    assert v.sparse and len(v.learned) == 0


def test_verdicts_and_ledger():
    rng = np.random.default_rng(3)
    h = PauliHamiltonian.from_labels({"XZI": 0.5, "IYY": -0.3})
    v = test_sparsity(EvolutionOracle(h, rng), 2, 0.2, 1.0, 0.1)
    assert v.sparse
    assert v.steps == trotter_steps(v.t, 1.0, 2, 0.2)
    assert v.ledger["learning_time"] + v.ledger["testing_time"] == pytest.approx(v.ledger["total_time"])
    doc = v.to_dict()
    assert doc["verdict"] == "M_SPARSE" and doc["r"] == v.steps

    far = far_instance(3, 2, 0.2, np.random.default_rng(5))
    assert not test_sparsity(EvolutionOracle(far, np.random.default_rng(5)), 2, 0.2, 1.0, 0.1).sparse


def test_domain_errors():
    oracle = EvolutionOracle(PauliHamiltonian.zero(1))
    with pytest.raises(DomainError):
        test_sparsity(oracle, 1, 0.2, 0.0, 0.1)
    with pytest.raises(DomainError):
        test_sparsity(oracle, -1, 0.2, 1.0, 0.1)
